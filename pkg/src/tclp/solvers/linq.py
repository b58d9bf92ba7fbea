"""Linear arithmetic over the rationals, combined with Herbrand terms."""

from __future__ import annotations

from fractions import Fraction

from ..terms import Const
from .herbrand import HerbrandStore
from .linear import LinAtom, LinStore


class LinQStore(HerbrandStore):
    """Herbrand terms combined with linear constraints over Q."""

    domain = "linq"
    arith_factory = LinStore
    default_value = Const(Fraction(0))


__all__ = ["LinAtom", "LinQStore", "LinStore"]
