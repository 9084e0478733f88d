"""Numerical L(E,1), real period, and rational reconstruction.

This is the floating-point side used to calibrate the integral eigensymbol
and as the independent oracle in the golden-run tests.  Everything exact
lives elsewhere; here plain float64 suffices for the 1e-8 targets.
"""

import cmath
import math
from fractions import Fraction

from .curve import bad_prime_aq, ap_table


def an_list(E, nmax):
    """Fourier coefficients a_1..a_nmax from multiplicativity."""
    a = [0] * (nmax + 1)
    a[1] = 1
    table = ap_table(E, nmax)
    aq = dict(table.good)
    for q in table.bad:
        aq[q] = bad_prime_aq(E, q)
    for q in sorted(aq):
        if q > nmax:
            break
        # prime powers
        powers = {1: 1, q: aq[q]}
        qk = q * q
        while qk <= nmax:
            if E.conductor % q == 0:
                powers[qk] = powers[qk // q] * aq[q]
            else:
                powers[qk] = aq[q] * powers[qk // q] - q * powers[qk // q // q]
            qk *= q
        for qk, val in powers.items():
            if qk == 1:
                continue
            for m in range(1, nmax // qk + 1):
                if m % q != 0 and a[m] != 0 and m * qk <= nmax:
                    a[m * qk] = a[m] * val
    return a


def _partial_sum(E, a, t):
    """F(t) = sum a_n/n exp(-2 pi n t / sqrt(N))."""
    c = 2 * math.pi * t / math.sqrt(E.conductor)
    total = 0.0
    for n in range(len(a) - 1, 0, -1):
        if a[n]:
            total += a[n] / n * math.exp(-c * n)
    return total


def lvalue_and_sign(E, eps=1e-12):
    """(L(E,1), numerical functional-equation sign).

    L(E,1) = F(1/t) + w F(t) for every t > 0, where F(t) is the incomplete
    sum above.  For w = -1 this forces F(t) = F(1/t) identically, which is
    how the sign is detected; two test points guard against a coincidence.
    """
    N = E.conductor
    tmin = 1 / 1.5
    x = math.exp(-2 * math.pi * tmin / math.sqrt(N))
    nmax = 20
    while x**nmax > eps and nmax < 10**7:
        nmax *= 2
    a = an_list(E, nmax)
    scale = max(1.0, abs(_partial_sum(E, a, 1.0)))
    deltas = []
    values = []
    for t in (1.2, 1.45):
        ft, fit = _partial_sum(E, a, t), _partial_sum(E, a, 1 / t)
        deltas.append(abs(fit - ft))
        values.append(fit + ft)
    if max(deltas) < 1e-9 * scale:
        return 0.0, -1
    assert abs(values[0] - values[1]) < 1e-9 * scale
    return values[0], +1


def lvalue(E):
    """L(E, 1); exactly 0.0 when the functional-equation sign is -1."""
    return lvalue_and_sign(E)[0]


def _cubic_roots(c2, c1, c0):
    """Roots of x^3 + c2 x^2 + c1 x + c0 (Cardano + Newton polish)."""
    a, b, c = complex(c2), complex(c1), complex(c0)
    p = b - a * a / 3
    q = 2 * a**3 / 27 - a * b / 3 + c
    disc = (q / 2) ** 2 + (p / 3) ** 3
    s = cmath.sqrt(disc)
    for candidate in (-q / 2 + s, -q / 2 - s):
        if abs(candidate) > 1e-30:
            u = candidate ** (1 / 3)
            break
    else:
        u = complex(0)
    roots = []
    omega = complex(-0.5, math.sqrt(3) / 2)
    for k in range(3):
        w = u * omega**k
        z = w - p / (3 * w) - a / 3 if abs(w) > 1e-30 else -a / 3
        for _ in range(60):
            f = z**3 + a * z * z + b * z + c
            df = 3 * z * z + 2 * a * z + b
            if abs(df) < 1e-300:
                break
            step = f / df
            z -= step
            if abs(step) < 1e-16 * max(1.0, abs(z)):
                break
        roots.append(z)
    return roots


def _gauss_legendre_nodes(n):
    nodes = []
    for k in range(1, n + 1):
        # Newton from Chebyshev initial guess for the Legendre root
        x = math.cos(math.pi * (k - 0.25) / (n + 0.5))
        for _ in range(100):
            p0, p1 = 1.0, x
            for j in range(2, n + 1):
                p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
            dp = n * (x * p1 - p0) / (x * x - 1)
            dx = p1 / dp
            x -= dx
            if abs(dx) < 1e-16:
                break
        w = 2 / ((1 - x * x) * dp * dp)
        nodes.append((x, w))
    return nodes


_GL = None


def _integrate01(f):
    """Integral of f over [0, 1] by 80-point composite Gauss-Legendre."""
    global _GL
    if _GL is None:
        _GL = _gauss_legendre_nodes(80)
    total = 0.0
    pieces = 4
    for i in range(pieces):
        a, b = i / pieces, (i + 1) / pieces
        mid, half = (a + b) / 2, (b - a) / 2
        total += half * sum(w * f(mid + half * x) for x, w in _GL)
    return total


def real_period(E):
    """Least positive real period of the Neron differential, by quadrature.

    Omega^+ = 2 * int_{e1}^{inf} dx / sqrt(4x^3 + b2 x^2 + 2 b4 x + b6) with
    e1 the largest real root; the substitutions x = e1 + t^2 and t = 1/s give
    two analytic integrals on [0, 1].
    """
    roots = _cubic_roots(
        Fraction(E.b2, 4), Fraction(2 * E.b4, 4), Fraction(E.b6, 4)
    )
    real_roots = sorted((z.real for z in roots if abs(z.imag) < 1e-7 * (1 + abs(z))),
                        reverse=True)
    e1 = real_roots[0]
    others = []
    for z in roots:
        if abs(z.real - e1) > 1e-9 * (1 + abs(z)) or abs(z.imag) > 1e-7 * (1 + abs(z)):
            others.append(z)
    if len(others) > 2:
        others = sorted(others, key=lambda z: abs(z - e1), reverse=True)[:2]
    A, B = others

    def integrand_t(t):
        # 1 / sqrt((t^2 + e1 - A)(t^2 + e1 - B)), real and positive
        val = (t * t + e1 - A) * (t * t + e1 - B)
        return 1.0 / math.sqrt(abs(val))

    part1 = _integrate01(integrand_t)

    def integrand_s(s):
        if s == 0.0:
            return 1.0  # limit of s^2 * integrand_t(1/s) as s -> 0
        t = 1.0 / s
        val = (t * t + e1 - A) * (t * t + e1 - B)
        return 1.0 / (s * s * math.sqrt(abs(val)))

    part2 = _integrate01(integrand_s)
    return 2.0 * (part1 + part2)


def rational_reconstruct(x, max_den=10**6, tol=1e-8):
    """Nearest rational with small denominator, or None when ambiguous."""
    if not math.isfinite(x):
        return None
    frac = Fraction(x).limit_denominator(max_den)
    if abs(float(frac) - x) <= tol * max(1.0, abs(x)):
        return frac
    return None


def lratio(E, max_den=10**4):
    """(float L(E,1)/Omega+, reconstructed Fraction or None).

    A reconstructed 0 means the L-value vanishes to working precision (odd
    functional equation); calibration is then impossible and skipped.
    """
    L, _ = lvalue_and_sign(E)
    omega = real_period(E)
    ratio = L / omega
    rec = rational_reconstruct(ratio, max_den=max_den, tol=1e-6)
    return ratio, rec
