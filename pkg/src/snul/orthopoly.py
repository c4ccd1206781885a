"""Monic orthogonal polynomials from three-term recurrences, their moments,
associated polynomials and second-kind functions.

Conventions: u_0 = gamma_0 = 1, P_{-1} = 0, P_0 = 1, and the associated
sequence starts P1_{-1} = 0, P1_0 = 1 with the index-shifted recurrence
P1_n = (x - beta_n) P1_{n-1} - gamma_n P1_{n-2}.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from typing import Sequence

from .errors import InsufficientTruncation, InvalidRecurrence, NotQuasiDefinite
from .fieldext import QuadField
from .poly import Poly
from .series import LaurentSeries


def _check_recurrence(beta: Sequence[Fraction], gamma: Sequence[Fraction], n_max: int):
    if len(beta) < n_max + 1 or len(gamma) < n_max + 1:
        raise InvalidRecurrence(
            f"need beta_0..beta_{n_max} and gamma_0..gamma_{n_max}, "
            f"got lengths {len(beta)}, {len(gamma)}"
        )
    if gamma[0] != 1:
        raise InvalidRecurrence(f"gamma_0 must equal 1 (got {gamma[0]})")
    for n in range(1, n_max + 1):
        if gamma[n] == 0:
            raise InvalidRecurrence(f"gamma_{n} = 0")


@dataclass
class SMOPData:
    """A sequence of monic orthogonal polynomials with everything attached."""

    field: QuadField
    beta: list[Fraction]
    gamma: list[Fraction]
    moments: list[Fraction]
    P: list[Poly]
    P1: list[Poly]
    n_max: int
    _P1_minus1: Poly = dataclass_field(init=False, repr=False, default=None)

    def __post_init__(self):
        self._P1_minus1 = Poly.zero(self.field)

    def poly(self, n: int) -> Poly:
        """P_n, with P_{-1} = 0."""
        if n == -1:
            return self._P1_minus1
        return self.P[n]

    def assoc(self, n: int) -> Poly:
        """P1_n, with P1_{-1} = 0."""
        if n == -1:
            return self._P1_minus1
        return self.P1[n]

    def gamma_product(self, n: int) -> Fraction:
        """gamma_0 * ... * gamma_n."""
        out = Fraction(1)
        for k in range(n + 1):
            out *= self.gamma[k]
        return out

    def stieltjes(self) -> LaurentSeries:
        """S = sum u_n x^(-n-1), windowed by the stored moments."""
        return LaurentSeries.from_moments(self.field, self.moments)


def smop_from_recurrence(field: QuadField, beta, gamma, n_max: int,
                         moments: list[Fraction] | None = None,
                         moment_order: int | None = None) -> SMOPData:
    """Generate P_0..P_{n_max} and P1_0..P1_{n_max} exactly.

    Moments are attached from `moments` or computed through the tridiagonal
    operator; the default order is 2 n_max + 2 capped at what the supplied
    recurrence coefficients determine.
    """
    beta = [Fraction(b) for b in beta]
    gamma = [Fraction(g) for g in gamma]
    _check_recurrence(beta, gamma, n_max)
    x = Poly.x(field)
    P = [Poly.one(field)]
    prev = Poly.zero(field)
    for n in range(n_max):
        nxt = (x - beta[n]) * P[n] - prev * gamma[n]
        prev = P[n]
        P.append(nxt)
    P1 = [Poly.one(field)]
    prev = Poly.zero(field)
    for n in range(1, n_max + 1):
        nxt = (x - beta[n]) * P1[n - 1] - prev * gamma[n]
        prev = P1[n - 1]
        P1.append(nxt)
    if moments is None:
        if moment_order is None:
            moment_order = min(2 * n_max + 2, len(beta), len(gamma))
        moments = moments_from_recurrence(beta, gamma, moment_order)
    else:
        moments = [Fraction(u) for u in moments]
    return SMOPData(field, beta, gamma, moments, P, P1, n_max)


def moments_from_recurrence(beta, gamma, order: int) -> list[Fraction]:
    """u_k for k = 0..order via powers of the tridiagonal recurrence operator.

    u_k is the P_0-component of x^k expanded in the monic basis; each step is
    one application of the Jacobi-form operator, O(order^2) exact rational
    work in total.
    """
    if order < 0:
        raise ValueError("moment order must be nonnegative")
    beta = [Fraction(b) for b in beta]
    gamma = [Fraction(g) for g in gamma]
    size = order + 1
    if order > 0 and (len(beta) < order or len(gamma) < order):
        raise InvalidRecurrence(
            f"need recurrence coefficients up to index {order - 1} for u_0..u_{order}"
        )
    v = [Fraction(0)] * (size + 1)
    v[0] = Fraction(1)
    out = [Fraction(1)]
    support = 0
    for _ in range(order):
        nxt = [Fraction(0)] * (size + 1)
        for i in range(support + 1):
            vi = v[i]
            if vi == 0:
                continue
            nxt[i + 1] += vi
            nxt[i] += beta[i] * vi
            if i > 0:
                nxt[i - 1] += gamma[i] * vi
        support += 1
        v = nxt
        out.append(v[0])
    return out


def recurrence_from_moments(moments, n_max: int) -> tuple[list[Fraction], list[Fraction]]:
    """Invert the moment map with the exact Chebyshev algorithm.

    Returns beta_0..beta_{n_max} and gamma_0..gamma_{n_max} (gamma_0 = 1).
    Raises NotQuasiDefinite naming the first level whose Hankel determinant
    vanishes.  Needs moments u_0..u_{2 n_max + 1}.
    """
    u = [Fraction(m) for m in moments]
    need = 2 * n_max + 2
    if len(u) < need:
        raise InsufficientTruncation(required=need, available=len(u),
                                     message=f"need {need} moments for n_max = {n_max}")
    if u[0] != 1:
        raise InvalidRecurrence(f"u_0 must equal 1 (got {u[0]})")
    sigma_prev = [Fraction(0)] * len(u)          # sigma_{k-2, l}
    sigma = list(u)                              # sigma_{k-1, l} starting at k = 1
    beta = [u[1] / u[0]]
    gamma = [Fraction(1)]
    for k in range(1, n_max + 1):
        top = len(u) - k
        nxt = [Fraction(0)] * len(u)
        for l in range(k, top):
            nxt[l] = sigma[l + 1] - beta[k - 1] * sigma[l] - gamma[k - 1] * sigma_prev[l]
        if nxt[k] == 0:
            raise NotQuasiDefinite(k)
        gamma.append(nxt[k] / sigma[k - 1])
        beta.append(nxt[k + 1] / nxt[k] - sigma[k] / sigma[k - 1])
        sigma_prev, sigma = sigma, nxt
    return beta, gamma


def hankel_determinant(moments, n: int, shift: int = 0) -> Fraction:
    """det[u_{i+j+shift}] for i, j = 0..n-1, by exact Gaussian elimination.

    Kept as the independent oracle against the Chebyshev algorithm.
    """
    if n == 0:
        return Fraction(1)
    m = [[Fraction(moments[i + j + shift]) for j in range(n)] for i in range(n)]
    det = Fraction(1)
    for col in range(n):
        pivot = None
        for row in range(col, n):
            if m[row][col] != 0:
                pivot = row
                break
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for row in range(col + 1, n):
            factor = m[row][col] * inv
            if factor:
                for j in range(col, n):
                    m[row][j] -= factor * m[col][j]
    return det


def second_kind_series(data: SMOPData, s: LaurentSeries, n: int) -> LaurentSeries:
    """q_n = P_n S - P1_{n-1}, cross-checked against the three-term recurrence
    and against the required O(x^(-n-1)) decay.

    q_{-1} is the constant series 1.
    """
    if n == -1:
        return LaurentSeries.constant(data.field, 1, s.truncation_order)
    if n > data.n_max:
        raise ValueError(f"n = {n} exceeds n_max = {data.n_max}")
    required = 2 * n + 2
    if s.truncation_order < required:
        raise InsufficientTruncation(required=required, available=s.truncation_order)
    q_def = s.mul_poly(data.poly(n)) - LaurentSeries.from_poly(
        data.assoc(n - 1), s.truncation_order - max(n, 0)
    )
    # recurrence route: q_{k+1} = (x - beta_k) q_k - gamma_k q_{k-1}
    q_prev = LaurentSeries.constant(data.field, 1, s.truncation_order)
    q_cur = s
    x = Poly.x(data.field)
    for k in range(n):
        q_nxt = q_cur.mul_poly(x - data.beta[k]) - q_prev * data.gamma[k]
        q_prev, q_cur = q_cur, q_nxt
    if q_def.first_disagreement(q_cur) is not None:
        raise AssertionError(
            f"q_{n} by definition and by recurrence disagree at "
            f"x^{q_def.first_disagreement(q_cur)}"
        )
    for e in range(q_def._effective_top(), -n - 1, -1):
        if not q_def.coefficient(e).is_zero:
            raise InvalidRecurrence(
                f"moments inconsistent with recurrence: q_{n} fails "
                f"O(x^-{n + 1}) decay at x^{e}"
            )
    return q_def


def liouville_defect(data: SMOPData, n: int) -> Poly:
    """P1_n P_n - P_{n+1} P1_{n-1} - prod_{k=0}^n gamma_k; identically zero."""
    if n > data.n_max - 1:
        raise ValueError(f"liouville_defect needs P_{n + 1}; n_max = {data.n_max}")
    return (
        data.assoc(n) * data.poly(n)
        - data.poly(n + 1) * data.assoc(n - 1)
        - Poly.constant(data.field, data.gamma_product(n))
    )
