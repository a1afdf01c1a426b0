"""Test drivers, the assemble/link/run harness and the self-repair loop."""
