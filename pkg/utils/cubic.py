# utils/cubic.py

"""Closed-form roots of monic cubics, polished with one Newton step."""
import cmath
import math
from typing import Tuple

SQRT3_HALF = math.sqrt(3.0) / 2.0


def cube_root(x: float) -> float:
    """Signed real cube root."""
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def evaluate_monic_cubic(a2: float, a1: float, a0: float, z: complex) -> complex:
    """Evaluate z**3 + a2*z**2 + a1*z + a0 by Horner's rule."""
    return ((z + a2) * z + a1) * z + a0


def residual_scale(a2: float, a1: float, a0: float, z: complex) -> float:
    """Sum of the magnitudes of the four terms of the cubic at z."""
    r = abs(z)
    return r ** 3 + abs(a2) * r ** 2 + abs(a1) * r + abs(a0)


def _solve_depressed(p: float, q: float) -> Tuple[complex, complex, complex]:
    """Roots of t**3 + p*t + q == 0."""
    if p == 0.0 and q == 0.0:
        return 0j, 0j, 0j
    if q == 0.0:
        # t (t**2 + p) == 0
        s = math.sqrt(abs(p))
        if p > 0.0:
            return 0j, complex(0.0, s), complex(0.0, -s)
        return 0j, complex(s, 0.0), complex(-s, 0.0)

    # (q/2)^2 + (p/3)^3, written to avoid overflow of p**3 for large |p|
    half_q = q / 2.0
    third_p = p / 3.0
    disc = half_q * half_q + third_p * third_p * third_p

    if disc > 0.0 or p >= 0.0:
        # One real root and a conjugate pair; sign choice avoids cancellation.
        a = -cube_root(half_q + math.copysign(math.sqrt(max(disc, 0.0)), half_q))
        b = -third_p / a if a != 0.0 else 0.0
        real = a + b
        re = -real / 2.0
        im = SQRT3_HALF * abs(a - b)
        return complex(real, 0.0), complex(re, im), complex(re, -im)

    if disc == 0.0:
        # Double root.
        single = 3.0 * q / p
        double = -single / 2.0
        return complex(single, 0.0), complex(double, 0.0), complex(double, 0.0)

    # Three real roots (trigonometric form); p < 0 here.
    m = 2.0 * math.sqrt(-third_p)
    if m == 0.0:
        return 0j, 0j, 0j
    arg = (3.0 * q / p) / m
    theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
    return tuple(
        complex(m * math.cos(theta - 2.0 * math.pi * k / 3.0), 0.0) for k in range(3)
    )


def _polish(a2: float, a1: float, a0: float, z: complex) -> complex:
    """One Newton step, kept only if it does not increase the residual."""
    f = evaluate_monic_cubic(a2, a1, a0, z)
    df = (3.0 * z + 2.0 * a2) * z + a1
    if df == 0:
        return z
    candidate = z - f / df
    if abs(evaluate_monic_cubic(a2, a1, a0, candidate)) <= abs(f):
        return candidate
    return z


def solve_monic_cubic(a2: float, a1: float, a0: float) -> Tuple[complex, complex, complex]:
    """
    Return the three roots of the monic cubic

        z ** 3 + a2 * z ** 2 + a1 * z + a0 == 0

    Args:
        a2: Quadratic coefficient
        a1: Linear coefficient
        a0: Constant coefficient

    Returns:
        Tuple of three complex roots; real roots carry an exactly zero imaginary
        part and complex roots come as conjugate pairs.
    """
    shift = a2 / 3.0
    p = a1 - a2 * shift
    q = (2.0 * shift * shift - a1) * shift + a0

    roots = []
    for t in _solve_depressed(p, q):
        z = _polish(a2, a1, a0, t - shift)
        if t.imag == 0.0:
            z = complex(z.real, 0.0)
        roots.append(z)

    # Restore exact conjugate symmetry after the polish.
    if roots[1].imag != 0.0:
        roots[2] = roots[1].conjugate()
    return roots[0], roots[1], roots[2]


def solve_monic_quadratic(a1: float, a0: float) -> Tuple[complex, complex]:
    """Roots of z**2 + a1*z + a0 == 0."""
    disc = a1 * a1 - 4.0 * a0
    if disc >= 0.0:
        s = math.sqrt(disc)
        big = -(a1 + math.copysign(s, a1)) / 2.0
        if big == 0.0:
            return 0j, 0j
        return complex(big, 0.0), complex(a0 / big, 0.0)
    root = (-a1 + cmath.sqrt(disc)) / 2.0
    return root, root.conjugate()
