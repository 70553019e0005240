"""rodhom: numerical homogenisation of thin periodic elastic rods."""

__version__ = "0.1.0"
