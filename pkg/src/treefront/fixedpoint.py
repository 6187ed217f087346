"""Fixed-point cost arithmetic.

All objective values are carried as integers at a fixed scale of 10
(one decimal digit).  Keeping costs integral makes dominance checks,
additions and comparisons exact; floats appear only in plotting and in
the heuristic's bound geometry, never in stored values.
"""

from __future__ import annotations

SCALE = 10


def parse_value(text: str) -> int:
    """Parse a decimal literal with at most one fractional digit into
    fixed-point units.  ``"3.5" -> 35``, ``"-2" -> -20``.
    """
    text = text.strip()
    if not text:
        raise ValueError("empty numeric field")
    sign = 1
    if text[0] in "+-":
        if text[0] == "-":
            sign = -1
        text = text[1:]
    if "." in text:
        whole, frac = text.split(".", 1)
        if len(frac) > 1:
            # values beyond one decimal are not representable exactly
            raise ValueError(f"more than one fractional digit: {text!r}")
        if frac == "":
            frac = "0"
        if not (whole or frac):
            raise ValueError(f"bad numeric field: {text!r}")
        w = int(whole) if whole else 0
        return sign * (w * SCALE + int(frac))
    return sign * int(text) * SCALE


def format_value(units: int) -> str:
    """Render fixed-point units with exactly one fractional digit.

    Pure integer arithmetic: no float round-trip, so output is stable
    and byte-reproducible.
    """
    sign = "-" if units < 0 else ""
    a = abs(units)
    return f"{sign}{a // SCALE}.{a % SCALE}"


def format_vector(vec: tuple[int, ...]) -> str:
    return " ".join(format_value(x) for x in vec)


def parse_vector(fields: list[str] | tuple[str, ...]) -> tuple[int, ...]:
    return tuple(parse_value(f) for f in fields)
