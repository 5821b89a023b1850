# utils/number_utils.py

"""Number utility functions."""
import math
from typing import Union

INFINITY_TOKENS = ('inf', '+inf', 'infinity', '+infinity')


class NumberUtils:
    """Utility functions for parsing, comparing and formatting floats."""

    @staticmethod
    def parse_float(value: Union[str, float, int]) -> float:
        """
        Parse a float, admitting the string "inf" for infinite values.

        Args:
            value: Number or numeric string

        Returns:
            float: Parsed value

        Examples:
            "inf" -> math.inf
            "716" -> 716.0
        """
        if isinstance(value, str):
            token = value.strip().lower()
            if token in INFINITY_TOKENS:
                return math.inf
            return float(token)
        return float(value)

    @staticmethod
    def dump_float(value: float) -> Union[float, str]:
        """
        Prepare a float for JSON output.

        Args:
            value: Float to dump

        Returns:
            The value itself, or "inf" when it is infinite
        """
        if math.isinf(value) and value > 0:
            return 'inf'
        return value

    @staticmethod
    def format_sig(value: float, digits: int = 9) -> str:
        """
        Format a float with a fixed number of significant digits.

        Args:
            value: Float to format
            digits: Significant digits (default 9)

        Returns:
            str: Formatted number ("inf" for +∞)
        """
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        if math.isnan(value):
            return 'nan'
        return f"{value:.{digits}g}"

    @staticmethod
    def rel_close(a: float, b: float, rel_tol: float) -> bool:
        """Relative closeness that treats equal infinities as close."""
        if a == b:
            return True
        return math.isclose(a, b, rel_tol=rel_tol, abs_tol=0.0)

    @staticmethod
    def within_band(value: float, reference: float, band: float) -> bool:
        """
        Check whether value lies within a relative band around reference.

        Args:
            value: Value to test
            reference: Centre of the band
            band: Relative half-width

        Returns:
            bool: True if |value - reference| <= band * |reference|
        """
        if not math.isfinite(reference):
            return False
        return abs(value - reference) <= band * abs(reference)
