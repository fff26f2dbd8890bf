"""Writing-engagement analytics from document revision logs."""

__version__ = "0.1.0"
