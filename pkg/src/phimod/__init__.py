"""Filtered (phi, N)-modules over truncated power series in characteristic p."""
from .digits import DigitRational
from .errors import PhiModError
from .field import GF, get_field
from .series import SeriesRing, TruncSeries

__all__ = ["DigitRational", "PhiModError", "GF", "get_field", "SeriesRing", "TruncSeries"]
