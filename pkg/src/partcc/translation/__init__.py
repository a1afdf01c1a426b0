"""Translation requests, prompts, the model client and the backends."""
