"""Numerics for Morrey sequence spaces on dyadic cubes of Z^d."""
from .dyadic import DyadicCube, ancestor, cells_in, covering_level, stable_level
from .spaces import (FiniteSequence, SpaceParams, SupportedSequence, attaining_cube,
                     morrey_norm, morrey_norm_finite, morrey_norm_supported)

__all__ = [
    "DyadicCube", "ancestor", "cells_in", "covering_level", "stable_level",
    "FiniteSequence", "SpaceParams", "SupportedSequence", "attaining_cube",
    "morrey_norm", "morrey_norm_finite", "morrey_norm_supported",
]
