"""Wire-protocol adapter between Gymnasium Atari games and a remote controller."""

__version__ = "0.1.0"
