import random
from fractions import Fraction as F

import pytest

from snul import (
    DegenerateLattice,
    InvalidConic,
    LatticeClass,
    LaurentSeries,
    Poly,
    SurdPoly,
    UnsupportedLatticeClass,
    apply_D,
    apply_D_series,
    apply_E_series,
    apply_M,
    apply_M_series,
    apply_shift,
    build_lattice,
    classify_lattice,
    lattice_points,
)
from snul.lattice import classify_invariants

from conftest import IMAGINARY_CONIC, random_poly, random_rational_lattice


# ---------------------------------------------------------------------------
# construction and classification
# ---------------------------------------------------------------------------

class TestBuild:
    def test_reference_lattice_invariants(self, reference_lattice):
        lat = reference_lattice
        field = lat.field
        assert lat.p == Poly(field, [0, F(5, 4)])
        assert lat.r == Poly(field, [-1, 0, F(9, 16)])
        assert lat.lam == F(9, 16)
        assert lat.tau == F(-9, 16)
        assert lat.q_trace == F(17, 4)
        assert lat.lattice_class is LatticeClass.Q_QUADRATIC
        # q = 4 solves q + 1/q = q_trace
        assert F(4) + F(1, 4) == lat.q_trace

    def test_centered_r_when_bd_equals_ae(self):
        # b*d = a*e makes the vertex shift vanish: r has no x term
        lat = build_lattice(1, -2, 1, 3, -6, 1)
        assert lat.r.coefficient(1).is_zero

    def test_invalid_conic(self):
        with pytest.raises(InvalidConic):
            build_lattice(0, 1, 1, 0, 0, 1)

    def test_unsupported_classes(self):
        with pytest.raises(UnsupportedLatticeClass):
            build_lattice(1, 0, 0, 0, 0, 1)      # lambda = tau = 0
        with pytest.raises(UnsupportedLatticeClass):
            build_lattice(1, 1, 1, 0, 0, 0)      # tau = 0, lambda != 0

    def test_classification_table(self, reference_lattice):
        assert classify_lattice(reference_lattice) is LatticeClass.Q_QUADRATIC
        assert classify_invariants(F(0), F(0)) is LatticeClass.LINEAR
        assert classify_invariants(F(1), F(0)) is LatticeClass.Q_LINEAR
        assert classify_invariants(F(0), F(2)) is LatticeClass.QUADRATIC
        assert classify_invariants(F(9, 16), F(-9, 16)) is LatticeClass.Q_QUADRATIC

    def test_surd_lattice_field(self, surd_lattice):
        assert surd_lattice.field.d == 5

    def test_imaginary_lattice(self):
        lat = build_lattice(*IMAGINARY_CONIC)
        assert lat.field.d == -1
        assert lat.lattice_class is LatticeClass.Q_QUADRATIC


# ---------------------------------------------------------------------------
# operators on polynomials
# ---------------------------------------------------------------------------

class TestPolyOperators:
    def test_shift_of_x_is_branch(self, reference_lattice):
        lat = reference_lattice
        x = Poly.x(lat.field)
        e1 = apply_shift(lat, x, 1)
        assert e1.u == lat.p and e1.v == Poly.constant(lat.field, -1)
        e2 = apply_shift(lat, x, 2)
        assert e2.u == lat.p and e2.v == Poly.constant(lat.field, 1)

    def test_shift_of_constant(self, reference_lattice):
        lat = reference_lattice
        c = Poly.constant(lat.field, F(7, 3))
        img = apply_shift(lat, c, 2)
        assert img.u == c and img.v.is_zero

    def test_shift_of_x_squared(self, reference_lattice):
        lat = reference_lattice
        x2 = Poly(lat.field, [0, 0, 1])
        img = apply_shift(lat, x2, 2)
        assert img.u == lat.p * lat.p + lat.r
        assert img.v == lat.p * 2

    def test_D_of_linear_is_one(self, reference_lattice):
        lat = reference_lattice
        x = Poly.x(lat.field)
        for beta in (0, F(3, 2), -4):
            assert apply_D(lat, x - beta) == Poly.one(lat.field)

    def test_D_M_of_x_squared(self, reference_lattice):
        lat = reference_lattice
        x2 = Poly(lat.field, [0, 0, 1])
        assert apply_D(lat, x2) == Poly(lat.field, [0, F(5, 2)])      # y1 + y2
        assert apply_M(lat, x2) == Poly(lat.field, [-1, 0, F(17, 8)])  # p^2 + r

    def test_degree_law(self, rational_lattices):
        rng = random.Random(123)
        for lat in rational_lattices:
            for _ in range(12):
                f = random_poly(rng, lat.field, max_degree=8, min_degree=1)
                assert apply_D(lat, f).degree == f.degree - 1
                assert apply_M(lat, f).degree == f.degree
            assert apply_D(lat, Poly.constant(lat.field, 5)).is_zero


# ---------------------------------------------------------------------------
# the operator identity suite (shared with the acceptance tests)
# ---------------------------------------------------------------------------

def delta_y(lat) -> SurdPoly:
    """Delta_y = y2 - y1 = 2 sqrt(r)."""
    return SurdPoly(Poly.zero(lat.field), Poly.constant(lat.field, 2), lat.r)


def check_product_quotient_identities(lat, f: Poly, g: Poly):
    """The product/quotient rules for D and M, quotient forms cleared of
    denominators, all as exact identities in K[x][sqrt(r)]."""
    e1f, e2f = apply_shift(lat, f, 1), apply_shift(lat, f, 2)
    e1g, e2g = apply_shift(lat, g, 1), apply_shift(lat, g, 2)
    df, mf = e2f.v, e2f.u
    dg, mg = e2g.v, e2g.u
    gf = g * f
    d_gf, m_gf = apply_D(lat, gf), apply_M(lat, gf)
    delta = delta_y(lat)

    # D(gf) = Dg Mf + Mg Df and M(gf) = Mg Mf + (Delta^2/4) Dg Df
    assert d_gf == dg * mf + mg * df
    assert m_gf == mg * mf + lat.r * dg * df
    # equivalent product forms through E1/E2
    assert SurdPoly.from_poly(d_gf, lat.r) == dg * e1f + df * e2g
    assert SurdPoly.from_poly(d_gf, lat.r) == dg * e2f + df * e1g
    # quotient rules, multiplied through by E1f E2f (and Delta_y where the
    # divided difference of the quotient appears):
    #   D(g/f) E1f E2f Delta_y = E2g E1f - E1g E2f
    lhs = e2g * e1f - e1g * e2f
    assert lhs == delta * (dg * mf - df * mg)          # central D-quotient
    assert lhs == delta * (dg * e1f - df * e1g)        # E1 form
    assert lhs == delta * (dg * e2f - df * e2g)        # E2 form
    # M(g/f) 2 E1f E2f = E1g E2f + E2g E1f, whose right side must be a
    # polynomial; with g = 1 it collapses to M(1/f) E1f E2f = Mf
    sym = e1g * e2f + e2g * e1f
    assert sym.is_polynomial
    assert sym == (mg * mf * 2 - lat.r * 2 * dg * df)  # identE1E2 in M/D form


def check_lemma_identities(lat, f: Poly, g: Poly):
    """Lemma: polynomiality of E1f E2f, Mf, (E1f)^2 + (E2f)^2, and the two
    mixed identities."""
    e1f, e2f = apply_shift(lat, f, 1), apply_shift(lat, f, 2)
    e1g, e2g = apply_shift(lat, g, 1), apply_shift(lat, g, 2)
    df, mf = e2f.v, e2f.u
    dg, mg = e2g.v, e2g.u

    prod = e1f * e2f
    assert prod.is_polynomial
    summ = e1f + e2f
    assert summ.is_polynomial and summ.u == mf * 2
    squares = e1f * e1f + e2f * e2f
    assert squares.is_polynomial
    assert squares.u == mf * mf * 4 - prod.u * 2
    # E1f E2g + E1g E2f = 2 Mg Mf - (Delta^2/2) Dg Df
    assert e1f * e2g + e1g * e2f == mg * mf * 2 - lat.r * 2 * dg * df
    # -Df E1g + Dg E1f = 2 Mf Dg - D(gf)
    assert e1f * dg - e1g * df == SurdPoly.from_poly(
        mf * dg * 2 - apply_D(lat, g * f), lat.r
    )


class TestOperatorLaws:
    def test_product_quotient_rules(self, rational_lattices, surd_lattice):
        rng = random.Random(42)
        for lat in list(rational_lattices) + [surd_lattice]:
            for _ in range(8):
                f = random_poly(rng, lat.field, max_degree=6, min_degree=1)
                g = random_poly(rng, lat.field, max_degree=6)
                check_product_quotient_identities(lat, f, g)

    def test_lemma_identities(self, rational_lattices, surd_lattice):
        rng = random.Random(43)
        for lat in list(rational_lattices) + [surd_lattice]:
            for _ in range(8):
                f = random_poly(rng, lat.field, max_degree=6, min_degree=1)
                g = random_poly(rng, lat.field, max_degree=5)
                check_lemma_identities(lat, f, g)

    def test_random_lattices(self):
        rng = random.Random(44)
        for _ in range(5):
            lat = random_rational_lattice(rng)
            f = random_poly(rng, lat.field, max_degree=5, min_degree=1)
            g = random_poly(rng, lat.field, max_degree=4, min_degree=1)
            check_product_quotient_identities(lat, f, g)
            check_lemma_identities(lat, f, g)


# ---------------------------------------------------------------------------
# operators on series
# ---------------------------------------------------------------------------

class TestSeriesOperators:
    def test_agrees_with_shift_on_polynomials(self, rational_lattices, surd_lattice):
        rng = random.Random(77)
        for lat in list(rational_lattices) + [surd_lattice]:
            f = random_poly(rng, lat.field, max_degree=4, min_degree=1)
            emb = LaurentSeries.from_poly(f, 10)
            for j in (1, 2):
                img = apply_shift(lat, f, j)
                expect = LaurentSeries.from_poly(img.u, 10)
                if not img.v.is_zero:
                    expect = expect + lat.sqrt_r_series(14).mul_poly(img.v)
                assert apply_E_series(lat, emb, j).agrees_with(expect)

    def test_product_of_shifted_inverses(self, reference_lattice):
        # S = 1/x: (E1 S)(E2 S) = 1/(y1 y2) = a / (c x^2 + 2 e x + f)
        lat = reference_lattice
        s = LaurentSeries(lat.field, -1, [1], 8)
        e1, e2 = apply_E_series(lat, s, 1), apply_E_series(lat, s, 2)
        quadratic = Poly(lat.field, [1, 0, 1])       # x^2 + 1 here
        expect = LaurentSeries.from_poly(quadratic, 12).inverse()
        assert (e1 * e2).agrees_with(expect)

    def test_D_of_constant_series(self, reference_lattice):
        lat = reference_lattice
        c = LaurentSeries.constant(lat.field, F(3, 7), 8)
        assert apply_D_series(lat, c).is_zero_within_window()

    def test_M_minus_identity_leading_term(self, reference_lattice):
        # leading coefficient of M(x^-1) is the average of the 1/y_j leading
        # terms, (c1 + c2)/(2 c1 c2) = -b/c; the x^-1 term of MS - S is
        # (-b/c - 1) u_0.
        lat = reference_lattice
        s = LaurentSeries(lat.field, -1, [1, F(1, 2)], 6)
        ms = apply_M_series(lat, s)
        lead = -lat.b_hat / lat.c_hat
        assert (ms - s).coefficient(-1) == lead - 1
        # on a lattice with b = -c the difference really is O(x^-2)
        lat2 = build_lattice(*IMAGINARY_CONIC)
        s2 = LaurentSeries(lat2.field, -1, [1, F(1, 2)], 6)
        diff = apply_M_series(lat2, s2) - s2
        assert diff.coefficient(-1).is_zero
        assert diff.coefficient(0).is_zero

    def test_quotient_rules_on_series(self, reference_lattice):
        # D(1/f) = -Df/(E1f E2f) and M(1/f) = Mf/(E1f E2f): the left sides
        # go through series inversion and composition, the right sides
        # through polynomial images; both must agree within the window.
        rng = random.Random(5)
        lat = reference_lattice
        for _ in range(4):
            f = random_poly(rng, lat.field, max_degree=3, min_degree=1)
            inv = LaurentSeries.from_poly(f, 12).inverse()
            e1f, e2f = apply_shift(lat, f, 1), apply_shift(lat, f, 2)
            prod = (e1f * e2f).u
            inv_prod = LaurentSeries.from_poly(prod, 16).inverse()
            lhs_d = apply_D_series(lat, inv)
            rhs_d = -inv_prod.mul_poly(apply_D(lat, f))
            assert lhs_d.agrees_with(rhs_d)
            lhs_m = apply_M_series(lat, inv)
            rhs_m = inv_prod.mul_poly(apply_M(lat, f))
            assert lhs_m.agrees_with(rhs_m)

    def test_degenerate_branch_rejected(self):
        # c = 0 makes y1 y2 degenerate: one branch loses its leading term and
        # its 1/y_j expansion does not exist.
        lat = build_lattice(1, 2, 0, 0, 1, 1)
        assert lat.q_trace is None
        s = LaurentSeries(lat.field, -1, [1], 6)
        with pytest.raises(DegenerateLattice):
            apply_E_series(lat, s, 2)


# ---------------------------------------------------------------------------
# float diagnostics
# ---------------------------------------------------------------------------

class TestLatticePoints:
    def test_reference_points(self, reference_lattice):
        pts = lattice_points(reference_lattice, 4)
        assert pts is not None
        # x(s) = (2/3)(4^s + 4^-s)
        for s, value in enumerate(pts):
            assert value == pytest.approx((2 / 3) * (4 ** s + 4 ** -s), rel=1e-9)

    def test_asymmetric_conic_unavailable(self, surd_lattice):
        assert lattice_points(surd_lattice, 3) is None
