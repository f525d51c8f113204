"""Independent reference computations.

Nothing here touches the fixed-point pipeline: square roots come from a
Decimal Newton iteration, transforms are naive O(M^2) sums in mpmath and
compositions are Taylor-expanded numerically.
"""

from decimal import Decimal, localcontext

import mpmath


def newton_sqrt(n: int, digits: int) -> Decimal:
    with localcontext() as c:
        c.prec = digits + 10
        x = Decimal(max(n, 1))
        for _ in range(400):
            y = (x + Decimal(n) / x) / 2
            if y == x:
                break
            x = y
        return +x


def quadratic(p, q, d, r, digits=80) -> Decimal:
    with localcontext() as c:
        c.prec = digits + 10
        x = (p + q * newton_sqrt(d, digits + 10)) / r
        return x - int(x) if x >= 0 else x - int(x) + 1


def continued_fraction(x: Decimal, n: int) -> list[int]:
    out = []
    with localcontext() as c:
        c.prec = 120
        for _ in range(n):
            a = int(x)
            out.append(a)
            x = 1 / (x - a)
    return out


def coefficients_mp(poly):
    """Complex Fourier coefficients 0..degree of a TrigPoly, read as mpmath numbers."""
    return [poly.coeff(ell) for ell in range(poly.degree + 1)]


def evaluate(coeffs, theta):
    """sum over l of f(l) e^{2 pi i l theta} for real f, from one-sided coefficients."""
    total = mpmath.re(coeffs[0])
    for ell, c in enumerate(coeffs[1:], start=1):
        total += 2 * mpmath.re(c * mpmath.expjpi(2 * ell * theta))
    return total


def naive_dft(samples, degree):
    """f(l) = (1/M) sum_j f(j/M) e^{-2 pi i l j/M} for 0 <= l <= degree."""
    M = len(samples)
    return [mpmath.fsum(samples[j] * mpmath.expjpi(-2 * mpmath.mpf(ell * j) / M) for j in range(M)) / M
            for ell in range(degree + 1)]


def dense_max(fn, points=4001):
    return max(abs(fn(mpmath.mpf(j) / points)) for j in range(points))


def forcing_by_taylor(us, theta, order):
    """Coefficient of eps**order in sin(2 pi (theta + sum_k u_k(theta) eps^k)) / (2 pi).

    ``us`` holds one-sided coefficient lists of u_1, u_2, ...; the Taylor
    coefficient is taken numerically by mpmath at the current working precision.
    """
    vals = [evaluate(c, theta) for c in us]

    def f(eps):
        s = theta + sum(v * eps ** (k + 1) for k, v in enumerate(vals))
        return mpmath.sin(2 * mpmath.pi * s) / (2 * mpmath.pi)

    return mpmath.taylor(f, 0, order)[order]
