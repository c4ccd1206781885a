from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from snul import Poly, RiccatiData, build_lattice

# Reference q-quadratic lattice: p = (5/4)x, r = (9/16)x^2 - 1, lambda = 9/16.
REFERENCE_CONIC = (1, F(-5, 4), 1, 0, 0, 1)

# Further q-quadratic lattices with rational sqrt(lambda).
RATIONAL_CONICS = [
    REFERENCE_CONIC,
    (1, F(-13, 6), 4, 1, 1, 1),        # lambda = 25/36
    (1, F(-5, 2), 4, 0, 0, 1),         # lambda = 9/4
    (3, F(-15, 4), 3, F(3, 4), F(3, 2), -3),  # lambda = 81/16
]

# Genuine quadratic extension Q(sqrt(5)).
SURD_CONIC = (2, -3, 2, 1, 0, -1)

# Negative discriminant (Chebyshev-flavoured), field Q(sqrt(-1)).
IMAGINARY_CONIC = (2, -1, 1, 0, 0, 2)


@pytest.fixture(scope="session")
def reference_lattice():
    return build_lattice(*REFERENCE_CONIC)


@pytest.fixture(scope="session")
def rational_lattices():
    return [build_lattice(*conic) for conic in RATIONAL_CONICS]


@pytest.fixture(scope="session")
def surd_lattice():
    return build_lattice(*SURD_CONIC)


def random_fraction(rng: random.Random, span: int = 4) -> F:
    return F(rng.randint(-span, span), rng.randint(1, span))


def random_poly(rng: random.Random, field, max_degree: int = 8,
                min_degree: int = 0) -> Poly:
    deg = rng.randint(min_degree, max_degree)
    coeffs = [random_fraction(rng) for _ in range(deg)]
    lead = F(0)
    while lead == 0:
        lead = random_fraction(rng)
    return Poly(field, coeffs + [lead])


def random_rational_lattice(rng: random.Random):
    """A random q-quadratic lattice whose sqrt(lambda) is rational."""
    while True:
        s = F(rng.randint(1, 5), rng.randint(1, 4))     # sqrt(lambda)
        a = F(rng.randint(1, 3))
        b = random_fraction(rng, 5)
        lam = s * s
        if b * b == lam:
            continue
        c = (b * b - lam) / a
        d, e, f = (random_fraction(rng, 3) for _ in range(3))
        tau = (lam * (d * d - a * f) - (b * d - a * e) ** 2) / a
        if tau == 0 or c == 0:
            continue
        return build_lattice(a, b, c, d, e, f)


def random_quasi_definite_recurrence(rng: random.Random, n_top: int):
    """(beta, gamma) with gamma_0 = 1 and nonzero gamma_n, small rationals."""
    beta = [random_fraction(rng, 3) for _ in range(n_top + 1)]
    gamma = [F(1)]
    for _ in range(n_top):
        g = F(0)
        while g == 0:
            g = random_fraction(rng, 3)
        gamma.append(g)
    return beta, gamma


# -- the frozen end-to-end fixtures ------------------------------------------

def qhermite_riccati(lattice) -> RiccatiData:
    """Semiclassical instance on the reference lattice (the D-Appell family
    beta_n = 0, gamma_n = (4/9)(1 - 4^n)); discovered by fit_riccati and
    frozen."""
    field = lattice.field
    return RiccatiData(
        Poly(field, [8, 0, -9]),
        Poly.zero(field),
        Poly(field, [0, 12]),
        Poly(field, [-6]),
        lattice,
    )


def qhermite_corecursive_riccati(lattice) -> RiccatiData:
    """Co-recursive companion (beta_0 shifted by -1): B != 0."""
    field = lattice.field
    return RiccatiData(
        Poly(field, [8, 0, -9]),
        Poly(field, [-6, -12]),
        Poly(field, [12, 12]),
        Poly(field, [-6]),
        lattice,
    )


def qhermite_recurrence(n_top: int):
    beta = [F(0)] * (n_top + 1)
    gamma = [F(1)] + [F(4, 9) * (1 - 4 ** n) for n in range(1, n_top + 1)]
    return beta, gamma


def qhermite_corecursive_recurrence(n_top: int):
    beta, gamma = qhermite_recurrence(n_top)
    beta[0] = F(-1)
    return beta, gamma


def qhermite_wide_riccati(lattice) -> RiccatiData:
    """The same recurrence family is Laguerre-Hahn on the wide lattice
    (1, -5/2, 4, 0, 0, 1) too, with its own data; discovered and frozen."""
    field = lattice.field
    return RiccatiData(
        Poly(field, [4, 0, -18]),
        Poly.zero(field),
        Poly(field, [0, 12]),
        Poly(field, [-3]),
        lattice,
    )
