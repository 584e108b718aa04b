"""Training-free perceptual-control agent for paddle games.

Subpackages wire a frame-to-percept pipeline into a four-level
negative-feedback controller and run it against a deterministic
headless simulator or a remote environment over a byte protocol.
"""

from __future__ import annotations

__version__ = "0.1.0"
