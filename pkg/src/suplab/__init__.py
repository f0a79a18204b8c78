"""Amplified pre-trace tools for sup-norms of holomorphic newforms of square-free level."""

__version__ = "0.1.0"
