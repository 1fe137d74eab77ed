"""tensorlab: minimal tensor norms, free-group walk counts and LPS representations"""

__version__ = "1.0.0"
