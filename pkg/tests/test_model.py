import json

import numpy as np
import pytest

from vmar import (
    DegenerateModelError,
    ModelOrder,
    ModelStructureError,
    MultiplicativeVMAR,
    ReducedRankLeads,
    Representation,
    build_reduced_rank_leads,
    check_stationarity,
    decompose_reduced_rank,
    expand,
    param_count,
    rho,
    rho_nested,
    to_additive,
)

from conftest import random_coeff_stack, random_spd, random_stationary_model


def expansion_oracle(phi, psi, lead_first=True):
    """Term-by-term double loop over every (lead, lag) index pair.

    Independent of the convolution in the library: builds each coefficient
    from its own index condition (cross products of lead index l and lag
    index m land on power m - l).
    """
    r, s = phi.shape[0], psi.shape[0]
    n = phi.shape[1] if r else psi.shape[1]

    def cross(l, m):
        return psi[l - 1] @ phi[m - 1] if lead_first else phi[m - 1] @ psi[l - 1]

    a0 = np.eye(n)
    for i in range(1, min(r, s) + 1):
        a0 = a0 + cross(i, i)
    out = {0: a0}
    for i in range(1, r + 1):
        acc = -phi[i - 1].copy()
        for l in range(1, s + 1):
            for m in range(1, r + 1):
                if m - l == i:
                    acc = acc + cross(l, m)
        out[i] = acc
    for j in range(1, s + 1):
        acc = -psi[j - 1].copy()
        for l in range(1, s + 1):
            for m in range(1, r + 1):
                if m - l == -j:
                    acc = acc + cross(l, m)
        out[-j] = acc
    return out


def make_model(phi, psi, n, representation=Representation.LEAD_FIRST, lam=3.0):
    phi = np.asarray(phi, dtype=float).reshape(-1, n, n)
    psi = np.asarray(psi, dtype=float).reshape(-1, n, n)
    return MultiplicativeVMAR(
        order=ModelOrder(n, phi.shape[0], psi.shape[0]),
        phi=phi,
        psi=psi,
        sigma=np.eye(n),
        lam=lam,
        representation=representation,
    )


class TestExpand:
    def test_univariate_product(self):
        # (1 - 0.38 L)(1 - 0.85 L^-1) expands to 1.323 - 0.38 L - 0.85 L^-1
        model = make_model([0.38], [0.85], 1)
        poly = expand(model)
        assert poly.coeff(0)[0, 0] == pytest.approx(1.323, abs=1e-12)
        assert poly.coeff(1)[0, 0] == pytest.approx(-0.38, abs=1e-12)
        assert poly.coeff(-1)[0, 0] == pytest.approx(-0.85, abs=1e-12)

    def test_purely_causal(self):
        rng = np.random.default_rng(3)
        phi = random_coeff_stack(rng, 2, 3, 0.7)
        model = MultiplicativeVMAR(
            order=ModelOrder(3, 2, 0), phi=phi, psi=np.zeros((0, 3, 3)),
            sigma=np.eye(3), lam=4.0,
        )
        poly = expand(model)
        np.testing.assert_allclose(poly.a0, np.eye(3))
        for i in range(1, 3):
            np.testing.assert_allclose(poly.coeff(i), -phi[i - 1])

    def test_zero_leads_in_place(self):
        model = make_model(np.full((2, 2, 2), 0.1), np.zeros((1, 2, 2)), 2)
        poly = expand(model)
        np.testing.assert_allclose(poly.coeff(-1), np.zeros((2, 2)))
        np.testing.assert_allclose(poly.a0, np.eye(2))

    @pytest.mark.parametrize("representation", list(Representation))
    def test_matches_index_set_oracle_bivariate(self, representation):
        rng = np.random.default_rng(11)
        phi = random_coeff_stack(rng, 2, 2, 0.6)
        psi = random_coeff_stack(rng, 2, 2, 0.7)
        model = make_model(phi, psi, 2, representation=representation)
        poly = expand(model)
        oracle = expansion_oracle(phi, psi, representation is Representation.LEAD_FIRST)
        for j in range(-2, 3):
            np.testing.assert_allclose(poly.coeff(j), oracle[j], atol=1e-12)

    def test_matches_oracle_random_models(self):
        rng = np.random.default_rng(42)
        for _ in range(60):
            model = random_stationary_model(rng)
            poly = expand(model)
            oracle = expansion_oracle(
                model.phi, model.psi, model.representation is Representation.LEAD_FIRST
            )
            for j in range(-model.order.s, model.order.r + 1):
                np.testing.assert_allclose(poly.coeff(j), oracle[j], atol=1e-12)

    def test_scalar_representations_agree(self):
        # Univariate polynomials commute, so both orderings expand identically.
        rng = np.random.default_rng(7)
        for _ in range(20):
            phi = random_coeff_stack(rng, 2, 1, rng.uniform(0.2, 0.9))
            psi = random_coeff_stack(rng, 3, 1, rng.uniform(0.2, 0.9))
            lead = expand(make_model(phi, psi, 1, Representation.LEAD_FIRST))
            lag = expand(make_model(phi, psi, 1, Representation.LAG_FIRST))
            np.testing.assert_allclose(lead.coeffs, lag.coeffs, atol=1e-14)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ModelStructureError):
            MultiplicativeVMAR(
                order=ModelOrder(2, 1, 1),
                phi=np.zeros((1, 3, 3)),
                psi=np.zeros((1, 2, 2)),
                sigma=np.eye(2),
                lam=3.0,
            )


class TestToAdditive:
    @pytest.mark.parametrize(
        "phi, psi, b1, b2",
        [(0.38, 0.85, 0.29, 0.64), (0.34, 0.86, 0.26, 0.67),
         (0.43, 0.87, 0.31, 0.63), (0.87, 0.44, 0.63, 0.32)],
    )
    def test_univariate_rescaling(self, phi, psi, b1, b2):
        additive = to_additive(make_model([phi], [psi], 1))
        assert round(float(additive.b_lag[0, 0, 0]), 2) == b1
        assert round(float(additive.b_lead[0, 0, 0]), 2) == b2

    def test_zero_leads_identity(self):
        rng = np.random.default_rng(5)
        phi = random_coeff_stack(rng, 2, 2, 0.6)
        sigma = random_spd(rng, 2)
        model = MultiplicativeVMAR(
            order=ModelOrder(2, 2, 0), phi=phi, psi=np.zeros((0, 2, 2)),
            sigma=sigma, lam=5.0,
        )
        additive = to_additive(model)
        np.testing.assert_allclose(additive.b_lag, phi)
        np.testing.assert_allclose(additive.omega, sigma)

    def test_omega_formula_exact(self):
        rng = np.random.default_rng(9)
        model = random_stationary_model(rng)
        poly = expand(model)
        a0_inv = np.linalg.inv(poly.a0)
        expected = a0_inv @ model.sigma @ a0_inv.T
        additive = to_additive(model)
        np.testing.assert_allclose(additive.omega, 0.5 * (expected + expected.T), atol=1e-13)
        assert additive.lam == model.lam

    def test_reduced_rank_leads_are_annihilated(self):
        # delta' B_{-j} = 0: the defining property of a common bubble.
        rng = np.random.default_rng(17)
        order = ModelOrder(2, 2, 2)
        spec = ReducedRankLeads(
            order=order, k=1,
            delta_star=rng.uniform(-1, 1, size=(1, 1)),
            gammas=0.3 * rng.uniform(-1, 1, size=(2, 1, 2)),
        )
        psi = build_reduced_rank_leads(spec)
        model = MultiplicativeVMAR(
            order=order, phi=random_coeff_stack(rng, 2, 2, 0.5),
            psi=psi, sigma=random_spd(rng, 2), lam=3.0,
        )
        additive = to_additive(model)
        delta = spec.delta
        for b in additive.b_lead:
            np.testing.assert_allclose(delta.T @ b, 0.0, atol=1e-12)

    def test_singular_leading_coefficient(self):
        # 1 + psi*phi = 0 makes A_0 vanish.
        model = make_model([2.0], [-0.5], 1)
        with pytest.raises(DegenerateModelError):
            to_additive(model)


class TestReducedRank:
    def test_bivariate_study_matrix(self):
        # delta' = [1, -0.5] annihilates [1; 2]-loaded leads.
        spec = ReducedRankLeads(
            order=ModelOrder(2, 0, 1), k=1,
            delta_star=[[-0.5]], gammas=[[[0.6, 0.5]]],
        )
        psi = build_reduced_rank_leads(spec)
        np.testing.assert_allclose(psi[0], [[0.3, 0.25], [0.6, 0.5]], atol=1e-14)
        np.testing.assert_allclose(spec.delta.T @ spec.delta_perp, 0.0, atol=1e-15)

    def test_trivariate_study_matrix(self):
        spec = ReducedRankLeads(
            order=ModelOrder(3, 0, 1), k=1,
            delta_star=[[0.25, -0.5]],
            gammas=[[[0.2, 0.3, 0.4], [0.7, 0.35, 0.4]]],
        )
        psi = build_reduced_rank_leads(spec)
        np.testing.assert_allclose(
            psi[0], [[0.3, 0.1, 0.1], [0.2, 0.3, 0.4], [0.7, 0.35, 0.4]], atol=1e-14
        )

    def test_zero_delta_star_zeroes_top_rows(self):
        spec = ReducedRankLeads(
            order=ModelOrder(3, 0, 2), k=1,
            delta_star=np.zeros((1, 2)),
            gammas=np.arange(12, dtype=float).reshape(2, 2, 3) / 10.0,
        )
        psi = build_reduced_rank_leads(spec)
        np.testing.assert_allclose(psi[:, 0, :], 0.0)
        np.testing.assert_allclose(psi[:, 1:, :], spec.gammas)

    def test_rank_bound(self):
        rng = np.random.default_rng(23)
        for _ in range(40):
            n = int(rng.integers(2, 5))
            k = int(rng.integers(1, n))
            s = int(rng.integers(1, 4))
            spec = ReducedRankLeads(
                order=ModelOrder(n, 0, s), k=k,
                delta_star=rng.uniform(-2, 2, size=(k, n - k)),
                gammas=rng.uniform(-1, 1, size=(s, n - k, n)),
            )
            for mat in build_reduced_rank_leads(spec):
                sv = np.linalg.svd(mat, compute_uv=False)
                assert np.all(sv[n - k :] <= 1e-10 * max(sv[0], 1e-30))

    def test_decompose_round_trip(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            n = int(rng.integers(2, 5))
            k = int(rng.integers(1, n))
            s = int(rng.integers(1, 4))
            spec = ReducedRankLeads(
                order=ModelOrder(n, 0, s), k=k,
                delta_star=rng.uniform(-2, 2, size=(k, n - k)),
                gammas=rng.uniform(-1, 1, size=(s, n - k, n)),
            )
            psi = build_reduced_rank_leads(spec)
            ds, gammas = decompose_reduced_rank(psi, k)
            rebuilt = build_reduced_rank_leads(
                ReducedRankLeads(order=spec.order, k=k, delta_star=ds, gammas=gammas)
            )
            np.testing.assert_allclose(rebuilt, psi, atol=1e-10)

    @pytest.mark.parametrize("k", [0, 2, 3])
    def test_out_of_range_deficit(self, k):
        with pytest.raises(ModelStructureError):
            ReducedRankLeads(
                order=ModelOrder(2, 0, 1), k=k,
                delta_star=np.zeros((max(k, 1), max(2 - k, 1))),
                gammas=np.zeros((1, max(2 - k, 1), 2)),
            )

    def test_full_rank_validation(self):
        spec = ReducedRankLeads(
            order=ModelOrder(3, 0, 1), k=1,
            delta_star=[[0.5, 0.5]],
            gammas=[[[0.2, 0.3, 0.4], [0.4, 0.6, 0.8]]],  # second row = 2x first
        )
        with pytest.raises(DegenerateModelError):
            spec.validate_full_rank()


class TestStationarity:
    def test_univariate_radii(self):
        report = check_stationarity(make_model([0.38], [0.85], 1))
        assert report.stationary
        assert report.lag_radius == pytest.approx(0.38, abs=1e-12)
        assert report.lead_radius == pytest.approx(0.85, abs=1e-12)

    def test_unit_root_rejected(self):
        report = check_stationarity(make_model([1.0], [0.5], 1))
        assert not report.stationary
        assert report.lag_radius == pytest.approx(1.0, abs=1e-12)

    def test_bivariate_study_lags(self):
        # eigenvalues of [[0.5, 0.1], [0.2, 0.3]]: (0.8 +/- sqrt(0.12)) / 2
        model = make_model([[[0.5, 0.1], [0.2, 0.3]]], [[[0.0, 0.0], [0.0, 0.0]]], 2)
        report = check_stationarity(model)
        expected = (0.8 + np.sqrt(0.12)) / 2.0
        assert report.stationary
        assert report.lag_radius == pytest.approx(expected, abs=1e-12)

    def test_higher_order_companion(self):
        # Scalar (1 - 0.5 L - 0.4 L^2): root radius solves z^2 = 0.5 z + 0.4.
        model = make_model([0.5, 0.4], np.zeros((0, 1, 1)), 1)
        expected = (0.5 + np.sqrt(0.25 + 1.6)) / 2.0
        assert check_stationarity(model).lag_radius == pytest.approx(expected, abs=1e-12)


class TestCounting:
    def test_unrestricted_formula(self):
        assert param_count(ModelOrder(3, 1, 1)) == 18
        assert param_count(ModelOrder(1, 2, 3)) == 5

    def test_restricted_direct_count(self):
        # N=2, r=s=1, k=1: 4 lag + 2 loading + 1 delta_star entries.
        assert param_count(ModelOrder(2, 1, 1), k=1) == 7

    def test_rho_values(self):
        assert rho(3, 1, 1) == 1
        assert rho(3, 2, 1) == 4
        assert rho(2, 1, 1) == 1

    def test_counting_identity_exhaustive(self):
        # param_count difference equals rho, via independent direct enumeration.
        for n in range(2, 6):
            for s in range(0, 5):
                for r in range(0, 3):
                    order = ModelOrder(n, r, s)
                    for k in range(1, n):
                        free = n * n * r + k * (n - k) + s * (n - k) * n
                        assert param_count(order, k) == free
                        assert param_count(order) - param_count(order, k) == rho(n, k, s)

    def test_rho_additivity(self):
        for n in range(3, 6):
            for s in range(0, 4):
                for k in range(2, n):
                    for l in range(1, k):
                        assert rho(n, k, s) == rho(n, l, s) + rho_nested(n, k, l, s)
                        assert rho_nested(n, k, l, s) > 0 or s == 0

    def test_range_checks(self):
        with pytest.raises(ModelStructureError):
            rho(3, 3, 1)
        with pytest.raises(ModelStructureError):
            rho_nested(3, 1, 2, 1)


class TestSerialization:
    def test_json_round_trip(self):
        rng = np.random.default_rng(13)
        model = random_stationary_model(rng, representation=Representation.LAG_FIRST)
        text = model.to_json()
        payload = json.loads(text)
        for key in ("N", "r", "s", "phi", "psi", "sigma", "lambda", "representation"):
            assert key in payload
        assert payload["representation"] == "lag_first"
        back = MultiplicativeVMAR.from_json(text)
        assert back.order == model.order
        np.testing.assert_allclose(back.phi, model.phi)
        np.testing.assert_allclose(back.psi, model.psi)
        np.testing.assert_allclose(back.sigma, model.sigma)
        assert back.lam == model.lam
        assert back.representation == model.representation

    def test_malformed_json(self):
        with pytest.raises(ModelStructureError):
            MultiplicativeVMAR.from_json("not json at all {")
        with pytest.raises(ModelStructureError):
            MultiplicativeVMAR.from_json(json.dumps({"N": 2, "r": 1}))


class TestModelValidation:
    def test_orders(self):
        with pytest.raises(ModelStructureError):
            ModelOrder(0, 1, 1)
        with pytest.raises(ModelStructureError):
            ModelOrder(2, -1, 1)

    def test_sigma_must_be_spd(self):
        with pytest.raises(DegenerateModelError):
            MultiplicativeVMAR(
                order=ModelOrder(2, 1, 0),
                phi=np.zeros((1, 2, 2)), psi=np.zeros((0, 2, 2)),
                sigma=[[1.0, 2.0], [2.0, 1.0]], lam=3.0,
            )

    def test_lambda_positive(self):
        with pytest.raises(ModelStructureError):
            MultiplicativeVMAR(
                order=ModelOrder(1, 1, 0), phi=[[[0.5]]], psi=np.zeros((0, 1, 1)),
                sigma=[[1.0]], lam=0.0,
            )
