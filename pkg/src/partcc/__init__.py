"""partcc: split C functions into control blocks, translate each block to
x86-64 assembly, rebuild, and verify the result by running it."""

__version__ = "0.1.0"
