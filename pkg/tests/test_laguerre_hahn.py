import random
from fractions import Fraction as F

import pytest

from snul import (
    Certificate,
    FreeMoment,
    Inconsistent,
    InsufficientTruncation,
    LaurentSeries,
    NotLaguerreHahn,
    Poly,
    RiccatiData,
    Underdetermined,
    certify,
    corollary_coeffs,
    corollary_recursion,
    fit_riccati,
    magnus_data_from_coeffs,
    magnus_step,
    reconstruct_riccati,
    riccati_nullspace,
    riccati_residual,
    second_kind_series,
    smop_from_recurrence,
    solve_moments_from_riccati,
    structure_coeffs_direct,
    telescope_residuals,
    verify_second_kind_relations,
    verify_structure_relations,
)
from snul.laguerre_hahn import MagnusRiccatiData, initial_structure_coeffs

from conftest import (
    qhermite_corecursive_recurrence,
    qhermite_corecursive_riccati,
    qhermite_recurrence,
    qhermite_riccati,
)

N_MAX = 6
ORDER = 2 * N_MAX + 12


@pytest.fixture(scope="module")
def semiclassical(reference_lattice):
    ric = qhermite_riccati(reference_lattice)
    moments = solve_moments_from_riccati(ric, ORDER)
    from snul import recurrence_from_moments
    beta, gamma = recurrence_from_moments(moments, N_MAX)
    data = smop_from_recurrence(reference_lattice.field, beta, gamma, N_MAX,
                                moments=moments)
    coeffs = structure_coeffs_direct(ric, data, N_MAX)
    return ric, data, coeffs


@pytest.fixture(scope="module")
def corecursive(reference_lattice):
    ric = qhermite_corecursive_riccati(reference_lattice)
    moments = solve_moments_from_riccati(ric, ORDER)
    from snul import recurrence_from_moments
    beta, gamma = recurrence_from_moments(moments, N_MAX)
    data = smop_from_recurrence(reference_lattice.field, beta, gamma, N_MAX,
                                moments=moments)
    coeffs = structure_coeffs_direct(ric, data, N_MAX)
    return ric, data, coeffs


class TestRiccatiResidual:
    def test_pure_A_term(self, reference_lattice):
        lat = reference_lattice
        field = lat.field
        ric = RiccatiData(Poly.one(field), Poly.zero(field), Poly.zero(field),
                          Poly.zero(field), lat)
        s = LaurentSeries.from_moments(field, [F(1), F(0), F(1, 2), F(0), F(1, 3)])
        res = riccati_residual(ric, s)
        # residual is exactly D S, nonzero unless D S vanishes
        assert not res.is_zero_within_window()

    def test_fixture_residual_zero(self, semiclassical):
        ric, data, _ = semiclassical
        res = riccati_residual(ric, data.stieltjes())
        assert res.is_zero_within_window()
        assert res.truncation_order >= ORDER - 2

    def test_perturbation_detected(self, semiclassical):
        ric, data, _ = semiclassical
        bad = list(data.moments)
        bad[3] += 1
        res = riccati_residual(ric, LaurentSeries.from_moments(ric.lattice.field, bad))
        assert not res.is_zero_within_window()


class TestSolveMoments:
    def test_u0_imposed(self, semiclassical):
        ric, _, _ = semiclassical
        assert solve_moments_from_riccati(ric, 0) == [F(1)]

    def test_matches_recurrence_route(self, reference_lattice):
        beta, gamma = qhermite_recurrence(20)
        from snul import moments_from_recurrence
        expect = moments_from_recurrence(beta, gamma, 20)
        ric = qhermite_riccati(reference_lattice)
        assert solve_moments_from_riccati(ric, 20) == expect

    def test_corecursive_matches(self, reference_lattice):
        beta, gamma = qhermite_corecursive_recurrence(16)
        from snul import moments_from_recurrence
        expect = moments_from_recurrence(beta, gamma, 16)
        ric = qhermite_corecursive_riccati(reference_lattice)
        assert solve_moments_from_riccati(ric, 16) == expect

    def test_ds_zero_inconsistent(self, reference_lattice):
        # A = 1, B = C = D = 0 demands D S = 0; already u_0 = 1 makes
        # D(x^-1) = -1/(y1 y2) nonzero, so the pre-constraints fail.
        lat = reference_lattice
        field = lat.field
        ric = RiccatiData(Poly.one(field), Poly.zero(field), Poly.zero(field),
                          Poly.zero(field), lat)
        with pytest.raises(Inconsistent) as exc:
            solve_moments_from_riccati(ric, 4)
        assert exc.value.k == 0

    def test_free_moment_surfaced(self, reference_lattice):
        # engineered so the u_1 equation is vacuous: with A = 17 x^2,
        # C = -20 x the leading contributions -(5/2) a_2 and (17/8) c_1
        # cancel, and D = 8 satisfies the x^0 pre-constraint.
        lat = reference_lattice
        field = lat.field
        ric = RiccatiData(Poly(field, [0, 0, 17]), Poly.zero(field),
                          Poly(field, [0, -20]), Poly(field, [8]), lat)
        with pytest.raises(FreeMoment) as exc:
            solve_moments_from_riccati(ric, 3)
        assert exc.value.k == 1
        # supplying the free value lets the solve continue past k = 1
        try:
            moments = solve_moments_from_riccati(ric, 3, free_values={1: F(5)})
            assert moments[1] == F(5)
        except Inconsistent as later:
            assert later.k > 1


class TestFit:
    def test_recovers_fixture(self, semiclassical):
        ric, data, _ = semiclassical
        s = data.stieltjes()
        cands = fit_riccati(ric.lattice, s, (2, 0, 1, 0))
        assert len(cands) == 1
        assert cands[0].proportional_to(ric)

    def test_nullspace_contains_original_with_loose_bounds(self, semiclassical):
        ric, data, _ = semiclassical
        s = data.stieltjes()
        basis = riccati_nullspace(ric.lattice, s, (3, 1, 2, 1))
        assert basis, "nullspace should not be empty"
        original = _vector_of(ric, (3, 1, 2, 1))
        assert _in_span(basis, original)

    def test_random_moments_fit_empty(self, reference_lattice):
        rng = random.Random(99)
        field = reference_lattice.field
        moments = [F(1)] + [F(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(33)]
        s = LaurentSeries.from_moments(field, moments)
        assert fit_riccati(reference_lattice, s, (4, 4, 4, 4)) == []

    def test_constant_bounds_rejected_by_A_filter(self, reference_lattice):
        field = reference_lattice.field
        moments = [F(1), F(1, 2), F(1, 3), F(2), F(1), F(0), F(1), F(2), F(3)]
        s = LaurentSeries.from_moments(field, moments)
        assert fit_riccati(reference_lattice, s, (0, 0, 0, 0)) == []


def _vector_of(ric: RiccatiData, bounds) -> list:
    field = ric.lattice.field
    vec = []
    for poly, bound in zip(ric.polys(), bounds):
        for i in range(bound + 1):
            vec.append(poly.coefficient(i))
    return vec


def _in_span(basis: list[list], vector: list) -> bool:
    """Rank test over the field: vector in span(basis)?"""
    rows = [list(b) for b in basis]

    def rank(mat):
        mat = [row[:] for row in mat]
        r = 0
        ncols = len(mat[0])
        for col in range(ncols):
            piv = next((i for i in range(r, len(mat)) if not mat[i][col].is_zero), None)
            if piv is None:
                continue
            mat[r], mat[piv] = mat[piv], mat[r]
            inv = mat[r][col].inverse()
            mat[r] = [v * inv for v in mat[r]]
            for i in range(len(mat)):
                if i != r and not mat[i][col].is_zero:
                    f = mat[i][col]
                    mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
            r += 1
        return r

    return rank(rows) == rank(rows + [list(vector)])


class TestStructureCoeffs:
    def test_initial_conditions(self, semiclassical):
        ric, data, coeffs = semiclassical
        lat = ric.lattice
        half_C = ric.C * F(1, 2)
        assert coeffs.l_at(-1) == half_C
        assert coeffs.pi_at(-1).is_zero
        assert coeffs.theta_at(-1) == ric.D
        m0 = lat.p - data.beta[0]
        assert coeffs.l_at(0) == -(m0 * ric.D) - half_C
        assert coeffs.pi_at(0) == ric.D * F(-1, 2)
        assert coeffs.theta_at(0) == (
            ric.A - lat.r * ric.D - (coeffs.l_at(0) - half_C) * m0 + ric.B
        )

    def test_initial_conditions_corecursive(self, corecursive):
        ric, data, coeffs = corecursive
        lat = ric.lattice
        half_C = ric.C * F(1, 2)
        m0 = lat.p - data.beta[0]
        assert coeffs.l_at(-1) == half_C
        assert coeffs.pi_at(0) == ric.D * F(-1, 2)
        assert coeffs.theta_at(0) == (
            ric.A - lat.r * ric.D - (coeffs.l_at(0) - half_C) * m0 + ric.B
        )

    def test_theta_hat_degree_bound(self, semiclassical, corecursive):
        for ric, data, coeffs in (semiclassical, corecursive):
            candidates = [ric.A.degree - 2]
            if not ric.B.is_zero:
                candidates.append(ric.B.degree - 2)
            if not ric.C.is_zero:
                candidates.append(ric.C.degree - 1)
            bound = max(candidates)
            for n in range(0, coeffs.max_level + 1):
                th = coeffs.theta_hat_at(n)
                assert th.is_zero or th.degree <= bound

    def test_gathered_A_definition(self, semiclassical):
        ric, data, coeffs = semiclassical
        assert coeffs.A_at(0) == ric.A          # pi_{-1} = 0
        for n in range(1, coeffs.max_level + 2):
            assert coeffs.A_at(n) == ric.A + (ric.lattice.r * 2) * coeffs.pi_at(n - 1)

    def test_non_lh_rejected(self, reference_lattice):
        lat = reference_lattice
        field = lat.field
        ric = qhermite_riccati(lat)
        moments = solve_moments_from_riccati(ric, ORDER)
        bad = list(moments)
        bad[5] += F(1, 7)
        from snul import recurrence_from_moments
        beta, gamma = recurrence_from_moments(bad, N_MAX)
        data = smop_from_recurrence(field, beta, gamma, N_MAX, moments=bad)
        with pytest.raises(NotLaguerreHahn):
            structure_coeffs_direct(ric, data, N_MAX)


class TestRelations:
    def test_structure_relations_zero(self, semiclassical, corecursive):
        for ric, data, coeffs in (semiclassical, corecursive):
            for n in range(1, N_MAX + 1):
                (r1a, r1b), (r2a, r2b) = verify_structure_relations(ric, data, coeffs, n)
                assert r1a.is_zero and r1b.is_zero
                assert r2a.is_zero and r2b.is_zero

    def test_sensitivity_to_theta(self, semiclassical):
        ric, data, coeffs = semiclassical
        tampered = initial_structure_coeffs(ric, data)
        tampered.append_level(coeffs.l_at(0), coeffs.pi_at(0),
                              coeffs.theta_at(0) + 1, coeffs.theta_hat_at(0))
        (r1a, _), _ = verify_structure_relations(ric, data, tampered, 1)
        assert not r1a.is_zero

    def test_second_kind_zero(self, semiclassical, corecursive):
        for ric, data, coeffs in (semiclassical, corecursive):
            s = data.stieltjes()
            for n in range(0, 4):
                r1, r2 = verify_second_kind_relations(ric, data, coeffs, s, n)
                assert r1.is_zero_within_window()
                assert r2.is_zero_within_window()

    def test_second_kind_at_zero_is_riccati(self, semiclassical):
        ric, data, coeffs = semiclassical
        s = data.stieltjes()
        r1, _ = verify_second_kind_relations(ric, data, coeffs, s, 0)
        res = riccati_residual(ric, s)
        w = min(r1.truncation_order, res.truncation_order)
        assert r1.restrict(w).agrees_with(res.restrict(w))

    def test_second_kind_window_guard(self, semiclassical):
        ric, data, coeffs = semiclassical
        short = LaurentSeries.from_moments(ric.lattice.field, data.moments[:7])
        with pytest.raises(InsufficientTruncation):
            verify_second_kind_relations(ric, data, coeffs, short, 3)

    def test_gathered_zero(self, semiclassical, corecursive):
        from snul import gathered_relations
        for ric, data, coeffs in (semiclassical, corecursive):
            s = data.stieltjes()
            for n in range(0, 4):
                rp, rp1, rq = gathered_relations(ric, data, coeffs, s, n)
                assert rp.is_zero and rp1.is_zero
                assert rq.is_zero_within_window()


class TestRecursions:
    def test_corollary_matches_direct(self, semiclassical, corecursive):
        for ric, data, coeffs in (semiclassical, corecursive):
            assert coeffs.same_as(corollary_coeffs(ric, data, N_MAX))

    def test_l0_from_level_minus_one(self, semiclassical):
        # the l and pi recursions already hold from level -1 to level 0
        ric, data, coeffs = semiclassical
        lat = ric.lattice
        m0 = lat.p - data.beta[0]
        assert coeffs.l_at(0) == -coeffs.l_at(-1) - m0 * (coeffs.theta_at(-1) / data.gamma[0])
        assert coeffs.pi_at(0) == -coeffs.pi_at(-1) - coeffs.theta_at(-1) / (2 * data.gamma[0])

    def test_single_step(self, semiclassical):
        ric, data, coeffs = semiclassical
        for n in range(0, N_MAX - 1):
            l_next, pi_next, theta_next = corollary_recursion(ric, data, coeffs, n)
            assert l_next == coeffs.l_at(n + 1)
            assert pi_next == coeffs.pi_at(n + 1)
            assert theta_next == coeffs.theta_at(n + 1)

    def test_telescopes(self, semiclassical, corecursive):
        for ric, data, coeffs in (semiclassical, corecursive):
            for n, l_res, t_res in telescope_residuals(ric, data, coeffs):
                assert l_res.is_zero, f"L_{n} nonzero"
                assert t_res.is_zero, f"T_{n + 1} mismatch"

    def test_magnus_consistency(self, semiclassical, corecursive):
        for ric, data, coeffs in (semiclassical, corecursive):
            for n in range(0, coeffs.max_level):
                stepped = magnus_step(
                    magnus_data_from_coeffs(ric, data, coeffs, n),
                    data.beta[n + 1], data.gamma[n + 1], ric.lattice,
                )
                direct = magnus_data_from_coeffs(ric, data, coeffs, n + 1)
                assert stepped.as_tuple() == direct.as_tuple()

    def test_magnus_b_update(self, semiclassical):
        # B_{n+1} = D_n / gamma_{n+1} with rho = 1, i.e. Theta_n/gamma_{n+1}
        ric, data, coeffs = semiclassical
        for n in range(0, coeffs.max_level):
            m = magnus_data_from_coeffs(ric, data, coeffs, n)
            stepped = magnus_step(m, data.beta[n + 1], data.gamma[n + 1], ric.lattice)
            assert stepped.B_n == m.D_n / data.gamma[n + 1]
            assert stepped.B_n == coeffs.theta_at(n) / data.gamma[n + 1]

    def test_magnus_zero_D_specialization(self, reference_lattice):
        lat = reference_lattice
        field = lat.field
        m = MagnusRiccatiData(
            0,
            Poly(field, [1, 2]),
            Poly(field, [3]),
            Poly(field, [0, 1]),
            Poly.zero(field),
            Poly.one(field),
        )
        stepped = magnus_step(m, F(1, 2), F(2), lat)
        assert stepped.A_n == m.A_n
        assert stepped.B_n.is_zero

    def test_ratio_riccati_holds_on_series(self, semiclassical):
        # the g_n = q_{n+1}/q_n data actually satisfies its Riccati equation
        ric, data, coeffs = semiclassical
        lat = ric.lattice
        s = data.stieltjes()
        for n in (0, 1, 2):
            m = magnus_data_from_coeffs(ric, data, coeffs, n)
            g = second_kind_series(data, s, n + 1) / second_kind_series(data, s, n)
            res = riccati_residual(
                RiccatiData(m.A_n, m.B_n, m.C_n, m.D_n, lat), g
            )
            assert res.is_zero_within_window()


class TestReconstruction:
    def test_roundtrip(self, semiclassical, corecursive):
        for ric, data, coeffs in (semiclassical, corecursive):
            rec = reconstruct_riccati(coeffs, ric.lattice)
            assert rec.proportional_to(ric)

    def test_semiclassical_B_recovered_zero(self, semiclassical):
        ric, data, coeffs = semiclassical
        rec = reconstruct_riccati(coeffs, ric.lattice)
        assert rec.B.is_zero

    def test_nonzero_pi_minus_one_rejected(self, semiclassical):
        ric, data, coeffs = semiclassical
        tampered = initial_structure_coeffs(ric, data)
        tampered.pi[0] = Poly.one(ric.lattice.field)
        with pytest.raises(NotLaguerreHahn):
            reconstruct_riccati(tampered, ric.lattice)

    def test_underdetermined_without_gathered(self, semiclassical):
        ric, data, coeffs = semiclassical
        stripped = initial_structure_coeffs(ric, data)
        stripped.append_level(coeffs.l_at(0), coeffs.pi_at(0),
                              coeffs.theta_at(0), coeffs.theta_hat_at(0))
        stripped.A_gathered = []
        with pytest.raises(Underdetermined):
            reconstruct_riccati(stripped, ric.lattice)


class TestCertify:
    def test_all_pass(self, reference_lattice):
        ric = qhermite_riccati(reference_lattice)
        cert = certify(ric, n_max=4, order=20)
        assert isinstance(cert, Certificate)
        assert cert.passed
        assert all(c.verdict == "pass" for c in cert.checks)

    def test_all_pass_on_wide_lattice(self):
        from snul import build_lattice
        from conftest import qhermite_wide_riccati
        lat = build_lattice(1, F(-5, 2), 4, 0, 0, 1)
        cert = certify(qhermite_wide_riccati(lat), n_max=4, order=20)
        assert cert.passed

    def test_non_lh_gating(self, reference_lattice):
        lat = reference_lattice
        field = lat.field
        ric = RiccatiData(Poly.one(field), Poly.zero(field), Poly.zero(field),
                          Poly.zero(field), lat)
        moments = [F(1)] + [F(1, k + 2) for k in range(19)]
        cert = certify(ric, n_max=4, order=18, moments=moments)
        assert not cert.passed
        assert cert.check("riccati").verdict == "fail"
        assert cert.check("structure-direct").verdict == "skip"

    def test_quasi_definite_gating(self, reference_lattice):
        # moments of a Dirac-type sequence satisfy a Riccati equation but
        # fail quasi-definiteness: certificate records the failing n
        lat = reference_lattice
        field = lat.field
        # S = 1/(x - t): A = 1, B = -1, C = D = 0 (checked by the residual)
        t = F(1, 2)
        ric = RiccatiData(Poly.one(field), Poly.constant(field, -1),
                          Poly.zero(field), Poly.zero(field), lat)
        moments = [t ** k for k in range(20)]
        cert = certify(ric, n_max=4, order=18, moments=moments)
        assert not cert.passed
        assert cert.check("riccati").verdict == "pass"
        assert cert.check("quasi-definite").verdict == "fail"
        assert "n = 1" in cert.check("quasi-definite").detail

    def test_certificate_json_roundtrip(self, reference_lattice):
        ric = qhermite_riccati(reference_lattice)
        cert = certify(ric, n_max=3, order=16, instance={"tag": "fixture"})
        blob = cert.to_dict()
        assert blob["passed"] is True
        assert blob["instance"] == {"tag": "fixture"}
        assert {c["name"] for c in blob["checks"]} >= {"riccati", "telescopes"}
