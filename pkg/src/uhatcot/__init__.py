"""Chain-of-thought traces, hard-attention transformer programs and Boolean sensitivity tools."""

__version__ = "0.1.0"
