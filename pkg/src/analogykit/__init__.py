"""analogykit: generation, verification, and evaluation of text-based analogy problems."""

__version__ = "0.1.0"
