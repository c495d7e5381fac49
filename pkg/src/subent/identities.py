"""Exact-arithmetic and quadrature oracles for the combinatorial identities.

The binomial-sum identities are checked in big-integer arithmetic; the
polynomial identity is checked by evaluation at degree + 1 integer points,
which over the rationals is equivalent to symbolic equality. The simplex
integrals are confirmed by adaptive quadrature after substituting away the
trace delta, independently of the Gamma-product closed forms they certify.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

from scipy import integrate

from .closedform import harmonic
from .errors import DimensionOrder, DomainError, QuadratureFailure

#: Relative accuracy the quadrature oracles must certify, per dimension.
QUADRATURE_TARGETS = {2: 1e-6, 3: 1e-4}


@dataclass(frozen=True)
class IdentityReport:
    """One verified identity instance; holds is exact equality of the sides."""

    name: str
    parameters: tuple[int, ...]
    lhs: Fraction
    rhs: Fraction
    holds: bool

    def __post_init__(self) -> None:
        if self.holds != (self.lhs == self.rhs):
            raise ValueError("holds flag contradicts the recorded sides")


def _check_pair(m: int, n: int) -> None:
    if m < 1:
        raise DomainError("indices must be positive")
    if m > n:
        raise DimensionOrder(f"need m <= n, got m={m}, n={n}")


def _alternating_term(m: int, n: int, k: int) -> Fraction:
    # (-1)^k Gamma(m+n-k) / (k! Gamma(m-k) Gamma(n-k)) with factorials
    value = Fraction(
        math.factorial(m + n - k - 1),
        math.factorial(k) * math.factorial(m - k - 1) * math.factorial(n - k - 1),
    )
    return -value if k % 2 else value


def gamma_ratio_sum_plain(m: int, n: int) -> IdentityReport:
    """sum_k (-1)^k Gamma(m+n-k) / (k! Gamma(m-k) Gamma(n-k)) = m n, exactly."""
    _check_pair(m, n)
    lhs = sum((_alternating_term(m, n, k) for k in range(m)), Fraction(0))
    rhs = Fraction(m * n)
    return IdentityReport("gamma_ratio_sum_plain", (m, n), lhs, rhs, lhs == rhs)


def gamma_ratio_sum_harmonic(m: int, n: int) -> IdentityReport:
    """Same alternating sum weighted by H_{m+n-1-k}, against m n (H_m + H_n - 1)."""
    _check_pair(m, n)
    lhs = sum(
        (_alternating_term(m, n, k) * harmonic(m + n - 1 - k) for k in range(m)),
        Fraction(0),
    )
    rhs = m * n * (harmonic(m) + harmonic(n) - 1)
    return IdentityReport("gamma_ratio_sum_harmonic", (m, n), lhs, rhs, lhs == rhs)


def riordan_identity_check(m: int, n: int) -> IdentityReport:
    """Binomial-product expansion C(z,m) C(z,n) = sum_k multinomial * C(z, m+n-k).

    Both sides are degree m + n polynomials in z, so agreement at the
    m + n + 1 integer points z = 0..m+n proves the identity. The report
    stores the evaluation at z = m + n, or the first mismatching point.
    """
    _check_pair(m, n)
    degree = m + n
    last = (Fraction(0), Fraction(0))
    for z in range(degree + 1):
        lhs = Fraction(math.comb(z, m) * math.comb(z, n))
        rhs = Fraction(0)
        for k in range(m + 1):
            multinomial = Fraction(
                math.factorial(m + n - k),
                math.factorial(k) * math.factorial(m - k) * math.factorial(n - k),
            )
            rhs += multinomial * math.comb(z, m + n - k)
        last = (lhs, rhs)
        if lhs != rhs:
            return IdentityReport("riordan_product", (m, n), lhs, rhs, False)
    return IdentityReport("riordan_product", (m, n), last[0], last[1], True)


def aomoto_moment_closed(m: int, k: int, alpha: float) -> float:
    """Closed form of the k-moment simplex integral assembled in log space.

    For the unit Vandermonde power this is
    prod_{j<=k}(alpha + m - j) * prod_j Gamma(alpha+j-1) Gamma(1+j)
    / Gamma(alpha m + m(m-1) + k).
    """
    if m < 1 or not 0 <= k <= m:
        raise DomainError(f"need 0 <= k <= m, got m={m}, k={k}")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    log = -math.lgamma(alpha * m + m * (m - 1) + k)
    for j in range(1, k + 1):
        log += math.log(alpha + (m - j))
    for j in range(1, m + 1):
        log += math.lgamma(alpha + j - 1) + math.lgamma(1 + j)
    return math.exp(log)


def _simplex_quadrature(m: int, alpha: float, moment: int) -> float:
    """Adaptive quadrature of the delta-reduced simplex integral for m in {2, 3}.

    The trace delta is removed by substituting the last coordinate, leaving
    an ordinary integral over the (m-1)-simplex. A rough pass fixes the
    scale, then a second pass integrates to the certified tolerance.
    """
    target = QUADRATURE_TARGETS[m]

    if m == 2:

        def integrand(x: float) -> float:
            y = 1.0 - x
            value = (x - y) ** 2 * (x * y) ** (alpha - 1.0)
            if moment >= 1:
                value *= x
            if moment >= 2:
                value *= y
            return value

        value, err = integrate.quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-10, limit=200)
        if err > target * abs(value):
            raise QuadratureFailure(f"1-D error estimate {err:.3g} above target")
        return value

    def integrand(y: float, x: float) -> float:
        z = 1.0 - x - y
        if z <= 0.0:
            return 0.0
        delta2 = ((x - y) * (x - z) * (y - z)) ** 2
        value = delta2 * (x * y * z) ** (alpha - 1.0)
        if moment >= 1:
            value *= x
        if moment >= 2:
            value *= y
        if moment >= 3:
            value *= z
        return value

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rough, _ = integrate.dblquad(
            integrand, 0.0, 1.0, 0.0, lambda x: 1.0 - x, epsabs=1e-13, epsrel=1e-3
        )
        scale = max(abs(rough), 1e-300)
        value, err = integrate.dblquad(
            integrand,
            0.0,
            1.0,
            0.0,
            lambda x: 1.0 - x,
            epsabs=scale * target * 1e-3,
            epsrel=target * 1e-2,
        )
    if err > target * abs(value):
        raise QuadratureFailure(f"2-D error estimate {err:.3g} above target")
    return value


def selberg_quadrature_oracle(m: int, alpha: float, gamma: float = 1.0) -> float:
    """Quadrature value of the trace-constrained Vandermonde-squared integral.

    Integrates delta(1 - sum) |Vandermonde|^2 prod x^(alpha-1) directly, as an
    independent check on the Gamma-product evaluation. Only the quadratic
    Vandermonde power (gamma = 1) is integrable here, and only m in {2, 3}
    keeps the dimension low enough for certified adaptive quadrature.
    """
    if gamma != 1.0:
        raise DomainError("the quadrature oracle is fixed at gamma = 1")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if m not in QUADRATURE_TARGETS:
        raise DomainError("the quadrature oracle covers m in {2, 3}")
    return _simplex_quadrature(m, alpha, moment=0)


def aomoto_quadrature_oracle(m: int, k: int, alpha: float) -> float:
    """Quadrature value of the k-moment simplex integral, for m in {2, 3}."""
    if m not in QUADRATURE_TARGETS:
        raise DomainError("the quadrature oracle covers m in {2, 3}")
    if not 1 <= k <= m:
        raise DomainError(f"need 1 <= k <= m, got k={k}")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    return _simplex_quadrature(m, alpha, moment=k)
