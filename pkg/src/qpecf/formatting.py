"""Numeric text formatting shared by the CLI and file writers."""


def sig12(x: float) -> str:
    """Render a float with 12 significant digits.

    A trailing ".0" is kept on integral values so float columns stay
    visibly floats ("1.0", not "1").
    """
    s = f"{float(x):.12g}"
    if "." not in s and "e" not in s and "nan" not in s and "inf" not in s:
        s += ".0"
    return s
