"""Small reference sets used by the acceptance suite and the README."""

from fractions import Fraction

# name -> (formula text, box per base variable)
GALLERY = {
    "point": ("x1 = 0", [(-2, 2)]),
    "interval": ("x1 >= 0 & 1 - x1 >= 0", [(-2, 2)]),
    "ray": ("x1 >= 0", [(-2, 2)]),
    "two_intervals": (
        "(x1 + 3/2 >= 0 & -1/2 - x1 >= 0) | (x1 - 1/2 >= 0 & 3/2 - x1 >= 0)",
        [(-2, 2)],
    ),
    "unit_disk": ("x1^2 + x2^2 <= 1", [(-2, 2), (-2, 2)]),
    "annulus": ("x1^2 + x2^2 >= 1 & 4 - x1^2 - x2^2 >= 0", [(-3, 3), (-3, 3)]),
    "disk_minus_open_disk": (
        "x1^2 + x2^2 <= 1 \\ x1^2 + x2^2 < 1/4",
        [(-2, 2), (-2, 2)],
    ),
    "strict_half_disk": ("x1^2 + x2^2 <= 1 & x2 > 0", [(-2, 2), (-2, 2)]),
    "punctured_line": ("x1 != 0", [(-2, 2)]),
    "two_disks": (
        "(x1 + 1)^2 + x2^2 <= 1/4 | (x1 - 1)^2 + x2^2 <= 1/4",
        [(-2, 2), (-2, 2)],
    ),
}


def gallery_box(name: str):
    return tuple((Fraction(lo), Fraction(hi)) for lo, hi in GALLERY[name][1])
