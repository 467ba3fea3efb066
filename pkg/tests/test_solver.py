import math

import numpy as np
import pytest

import oracles
from cavitation import (BracketError, ConfigError, NumericalError, RadialField, StagnationError,
                        critical_lambda, eps_sweep, gradient_flow_minimize, graded_mesh,
                        incompressible_energy, incompressible_profile, power_law_material,
                        shoot_punctured, solve_punctured)
from cavitation import solver as solver_mod
from cavitation.energy import modified_energy
from cavitation.solver import (check_invariants, discrete_energy, discrete_gradient,
                               incompressible_study)


class TestShooting:
    @pytest.mark.parametrize("eps", [0.3, 0.2])
    def test_outward_and_inward_agree(self, m1, eps):
        a = shoot_punctured(m1, 1.05, eps)
        b = shoot_punctured(m1, 1.05, eps, direction="inward")
        assert a.method == "outward" and b.method == "inward"
        assert a.cavity == pytest.approx(b.cavity, abs=1e-7)
        np.testing.assert_allclose(a.r, b.r, atol=1e-7)

    @pytest.mark.parametrize("eps", [0.2, 1e-4])
    def test_matches_oracle(self, bundles, eps):
        c, E, _ = oracles.example1().solve(1.05, eps)
        b = bundles(1.05, eps)
        assert b.cavity == pytest.approx(c, rel=1e-6)
        assert b.energy.modified == pytest.approx(E, abs=1e-6)

    def test_reported_cavity_and_energy(self, bundles):
        b = bundles(1.05, 1e-4)
        assert b.cavity == pytest.approx(0.44184, abs=2e-3)
        assert b.energy.modified == pytest.approx(1.2774, abs=2e-3)
        assert b.energy.boundary_formula == pytest.approx(b.energy.modified, abs=1e-2)
        assert b.residual <= 1e-9

    def test_interior_condition_holds(self, m1, bundles):
        b = bundles(1.05, 1e-4)
        assert b.that_profile[0] == pytest.approx(0.0, abs=1e-8)
        assert b.r[-1] == pytest.approx(1.05, abs=1e-9)

    def test_below_threshold_is_near_affine_and_concave(self, bundles):
        b = bundles(0.95, 1e-4)
        assert b.sup_distance(lambda R: 0.95 * R) <= 5e-3
        f = b.field
        assert np.all(f.node_slopes[:10] > f.v[:10])
        assert np.all(np.diff(f.node_slopes) <= 1e-12)  # concave
        assert b.energy.modified == pytest.approx(1.3625, abs=5e-3)
        assert b.energy.boundary_formula == pytest.approx(1.3625, abs=5e-3)

    def test_between_thresholds_has_boundary_layer(self, bundles):
        b = bundles(1.01, 1e-4)
        R = b.R
        away = R > 2e-4
        assert np.max(np.abs(b.r - 1.01 * R)[away]) <= 5e-3
        # strain at the puncture differs from the far field by O(1)
        assert abs(b.field.node_slopes[0] - 1.01) > 0.1
        assert abs(b.field.node_slopes[np.searchsorted(R, 1e-2)] - 1.01) < 1e-3

    @pytest.mark.parametrize("lam", [0.95, 1.01, 1.05])
    def test_invariants(self, m1, bundles, lam):
        checks = check_invariants(m1, bundles(lam, 1e-4))
        assert all(c.passed for c in checks), [c.line() for c in checks if not c.passed]

    def test_cauchy_stress_log_growth(self, m1, bundles):
        b = bundles(1.05, 1e-4)
        R = b.R
        T = b.cauchy_profile(m1)
        near = R < 1e-2
        corrected = T[near] - 2 * m1.kappa * np.log(R[near])
        assert np.ptp(corrected) < 0.1 * np.ptp(T[near])

    def test_guess_is_used(self, m1):
        cold = shoot_punctured(m1, 1.05, 0.3)
        warm = shoot_punctured(m1, 1.05, 0.3, guess=0.5)
        assert warm.cavity == pytest.approx(cold.cavity, abs=1e-10)
        assert warm.iterations <= cold.iterations

    @pytest.mark.parametrize("kw", [dict(eps=0.0), dict(eps=1.0), dict(lam=-1.0),
                                    dict(direction="sideways")])
    def test_rejects_bad_arguments(self, m1, kw):
        args = dict(lam=1.05, eps=0.3)
        args.update(kw)
        with pytest.raises(ValueError):
            shoot_punctured(m1, **args)

    def test_affine_fallback(self, m1, monkeypatch):
        def no_bracket(*a, **k):
            raise BracketError("no sign change")

        monkeypatch.setattr(solver_mod, "shoot_punctured", no_bracket)
        b = solve_punctured(m1, 0.95, 0.3, predictor=False)
        assert b.status == "affine-fallback"
        np.testing.assert_allclose(b.r, 0.95 * b.R)
        with pytest.raises(BracketError):
            solve_punctured(m1, 1.05, 0.3, predictor=False)

    def test_csv_and_metadata(self, m1, bundles, tmp_path):
        b = bundles(1.05, 0.2)
        b.to_csv(tmp_path / "b.csv", m1)
        f = RadialField.from_csv(tmp_path / "b.csv")
        np.testing.assert_array_equal(f.r, b.r)
        data = np.genfromtxt(tmp_path / "b.csv", delimiter=",", names=True)
        np.testing.assert_array_equal(data["That"], b.that_profile)
        b.write_metadata(tmp_path / "b.meta")
        meta = dict(line.split("=", 1) for line in (tmp_path / "b.meta").read_text().splitlines())
        assert float(meta["cavity"]) == b.cavity
        assert meta["status"] == "converged"


class TestGradientFlow:
    def test_gradient_matches_difference_quotient(self, m1):
        rng = np.random.default_rng(3)
        R = graded_mesh(0.1, 40)
        r = 0.3 + np.cumsum(rng.uniform(0.5, 1.5, 40)) * 0.02
        g = discrete_gradient(m1, R, r)
        h = 1e-6
        for i in (0, 7, 20, 38):
            e = np.zeros_like(r)
            e[i] = h * r[i]
            fd = (discrete_energy(m1, R, r + e) - discrete_energy(m1, R, r - e)) / (2 * e[i])
            assert g[i] == pytest.approx(fd, rel=1e-6)

    def test_predictor_close_to_shooting(self, m1):
        eps = 0.2
        R = graded_mesh(eps, 257)
        f = gradient_flow_minimize(m1, 1.05, eps, R, r0=incompressible_profile(R, 1.05))
        ref = shoot_punctured(m1, 1.05, eps)
        assert modified_energy(m1, f) == pytest.approx(ref.energy.modified, abs=5e-2)
        assert f.cavity == pytest.approx(ref.cavity, abs=5e-2)

    @pytest.mark.parametrize("lam", [0.95, 0.99])
    def test_stays_affine_below_threshold(self, m1, lam):
        hist = []
        f = gradient_flow_minimize(m1, lam, 1e-4, history=hist)
        assert np.max(np.abs(f.r - lam * f.R)) <= 1e-2
        energies = [e for e, _ in hist]
        assert all(b <= a for a, b in zip(energies, energies[1:]))

    def test_stagnation_carries_field(self, m1):
        R = graded_mesh(1e-4, 129)
        with pytest.raises(StagnationError) as info:
            gradient_flow_minimize(m1, 1.05, 1e-4, R, steps=1, r0=incompressible_profile(R, 1.05))
        assert isinstance(info.value.field, RadialField)
        assert info.value.field.lam == pytest.approx(1.05)


class TestCritical:
    def test_value_and_checks(self, critical):
        assert critical.lambda_c == pytest.approx(1.0258, abs=1e-3)
        assert critical.bar_lambda == pytest.approx(1.0, abs=1e-10)
        assert critical.integral_check <= 1e-3

    def test_matches_oracle(self, critical):
        assert critical.lambda_c == pytest.approx(oracles.example1().critical_lambda(), rel=1e-6)

    def test_scaling_property(self, critical, bundles):
        b = bundles(1.05, 1e-4)
        prof = critical.scaled_profile(1.05)
        R = b.R[b.R > 1e-2]
        assert np.max(np.abs(prof(R) - b.field(R))) <= 5e-3
        with pytest.raises(ValueError):
            critical.scale_for(1.0)

    def test_critical_profile_cavitates(self, critical):
        r = critical.profile(np.array([1e-5, 0.5, 1.0]))
        assert r[0] > 0.5 and np.all(np.diff(r) > 0)

    def test_samples_are_admissible(self, critical):
        R, r = critical.samples()
        assert len(R) > 1000
        f = RadialField(R, r)
        assert f.lam == pytest.approx(critical.lambda_c * R[-1], rel=1e-6)

    def test_requires_stress_free_material(self):
        with pytest.raises(ConfigError):
            critical_lambda(power_law_material(D=1.0))


class TestSweep:
    def test_cavitating_sweep(self, m1):
        s = eps_sweep(m1, 1.05, [0.3, 0.2, 1e-4])
        cav = [row["cavity"] for row in s.rows]
        # removing a larger core leaves a larger hole: cavities shrink toward the limit
        assert cav[0] > cav[1] > cav[2]
        assert cav[2] == pytest.approx(0.44184, abs=2e-3)
        d = [row["sup_dist_prev"] for row in s.rows[1:]]
        assert d[0] > d[1]
        assert not s.errors

    def test_warm_start_matches_cold(self, m1):
        warm = eps_sweep(m1, 1.05, [0.3, 0.2])
        cold = eps_sweep(m1, 1.05, [0.3, 0.2], warm_start=False)
        for a, b in zip(warm.rows, cold.rows):
            assert a["cavity"] == pytest.approx(b["cavity"], abs=1e-8)

    def test_sup_distance_to_affine_decreases(self, m1):
        s = eps_sweep(m1, 1.01, [0.2, 0.1, 0.05, 1e-4])
        d = [row["sup_dist_affine"] for row in s.rows]
        assert all(b < a for a, b in zip(d, d[1:]))

    def test_that_converges_to_negative_constant(self, m1):
        s = eps_sweep(m1, 0.95, [0.2, 0.1, 0.05, 1e-4])
        spreads = [np.ptp(b.that_profile[b.R >= 0.1]) for b in s.bundles]
        assert np.all(s.bundles[-1].that_profile[s.bundles[-1].R >= 0.1] < 0)
        assert spreads[-1] <= 1e-2
        assert spreads[-1] < spreads[0]

    def test_failures_are_collected(self, m1, monkeypatch):
        real = solver_mod.solve_punctured

        def flaky(m, lam, eps, **kw):
            if eps == 0.2:
                raise NumericalError("synthetic failure")
            return real(m, lam, eps, **kw)

        monkeypatch.setattr(solver_mod, "solve_punctured", flaky)
        s = eps_sweep(m1, 1.05, [0.3, 0.2, 0.1])
        assert list(s.errors) == [0.2]
        assert s.rows[1]["status"] == "failed" and math.isnan(s.rows[1]["cavity"])
        assert s.rows[2]["status"] == "converged"

    @pytest.mark.parametrize("eps_list", [[0.2, 0.3], [], [0.3, 1.5]])
    def test_rejects_bad_lists(self, m1, eps_list):
        with pytest.raises(ValueError):
            eps_sweep(m1, 1.05, eps_list)


class TestIncompressible:
    def test_profile(self):
        assert incompressible_profile(0.0, 1.05) == pytest.approx((1.05**3 - 1) ** (1 / 3),
                                                                  abs=1e-12)
        assert incompressible_profile(0.0, 1.05) == pytest.approx(0.540184, abs=1e-6)
        R = np.linspace(0.0, 1, 11)
        r = incompressible_profile(R, 1.05)
        # volume preserving: r^3 - R^3 is constant
        np.testing.assert_allclose(r**3 - R**3, 1.05**3 - 1, rtol=1e-12)

    def test_energy_matches_quadrature(self):
        want = oracles.incompressible_energy(1.05)
        assert incompressible_energy(1.05) == pytest.approx(want, abs=1e-5)
        assert incompressible_energy(1.05) == pytest.approx(1.53013, abs=2e-3)
        with pytest.raises(ValueError):
            incompressible_energy(0.99)

    def test_smallest_penalty(self):
        rows, bundles = incompressible_study([20.0, 80.0])
        assert rows[0]["energy"] == pytest.approx(1.52298, abs=2e-3)
        ref = oracles.example2(20.0).solve(1.05, 0.005)
        assert rows[0]["energy"] == pytest.approx(ref[1], abs=1e-6)
        assert rows[1]["sup_dist_inc"] < rows[0]["sup_dist_inc"] < 0.1
