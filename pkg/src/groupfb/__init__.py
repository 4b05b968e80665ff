"""Filter banks, frames and sampling on semi-direct products ``N x| H``."""

__version__ = "0.1.0"
