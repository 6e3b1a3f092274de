import numpy as np
import pytest
import scipy.optimize

from nehari import (
    ConfigError,
    SolverConfig,
    SolverError,
    assemble,
    check_critical_value_bounds,
    eigensolve,
    energy,
    energy_gradient,
    ground_state,
    inner_maximize,
    path_graph,
    power_nonlinearity,
    random_connected_graph,
    single_vertex_graph,
    split,
    verify_no_solution,
)
from nehari.graph import GraphFunction


def find_critical_points(g, nl, lam, kappa, n_starts=64, seed=0):
    """Oracle: residual-norm minimization from many random starts.

    Returns deduplicated critical points (residual below 1e-10) found by
    L-BFGS on half the squared m-weighted gradient norm.
    """
    fm = assemble(g)
    m = g.m
    cfg = SolverConfig(kappa=kappa, lam=lam)

    def objective(u):
        r = (fm.A @ u) / m - lam * u - kappa * nl.f(u)
        import scipy.sparse as sp

        B = sp.diags(1.0 / m) @ fm.A - lam * sp.eye(g.n) + sp.diags(-kappa * nl.df_values(u))
        return 0.5 * float(np.dot(m, r * r)), B.T @ (m * r)

    from nehari.solver import _newton_refine, _residual_m_norm

    rng = np.random.default_rng(seed)
    found = []
    for _ in range(n_starts):
        u0 = rng.standard_normal(g.n) * rng.uniform(0.3, 2.0)
        res = scipy.optimize.minimize(objective, u0, jac=True, method="L-BFGS-B",
                                      options={"maxiter": 2000, "ftol": 0.0, "gtol": 1e-13})
        u, resid = _newton_refine(fm, nl, cfg, res.x)
        if resid < 1e-10 and not any(np.allclose(u, v, atol=1e-6) for v in found):
            found.append(u)
    return found


class TestEnergy:
    def test_zero_vector(self, p3, quartic, focusing_cfg):
        assert energy(p3, quartic, focusing_cfg, np.zeros(3)) == 0.0

    def test_single_vertex_closed_form(self, single, quartic, focusing_cfg):
        for a in (0.3, 1.0, 2.0):
            expect = a**2 / 2 - a**4 / 4
            assert energy(single, quartic, focusing_cfg, np.array([a])) == pytest.approx(expect)

    def test_kappa_flip_ordering(self, p3, quartic):
        rng = np.random.default_rng(12)
        for _ in range(20):
            u = rng.standard_normal(3)
            foc = energy(p3, quartic, SolverConfig(kappa=1, lam=0.3), u)
            defoc = energy(p3, quartic, SolverConfig(kappa=-1, lam=0.3), u)
            assert defoc >= foc

    def test_even_in_u(self, p3, quartic, focusing_cfg):
        rng = np.random.default_rng(13)
        for _ in range(20):
            u = rng.standard_normal(3)
            assert energy(p3, quartic, focusing_cfg, u) == pytest.approx(
                energy(p3, quartic, focusing_cfg, -u), rel=1e-14
            )


class TestEnergyGradient:
    def test_zero_at_origin(self, p3, quartic, focusing_cfg):
        assert energy_gradient(p3, quartic, focusing_cfg, np.zeros(3)).values == pytest.approx(np.zeros(3))

    def test_single_vertex_stationary(self, single, quartic, focusing_cfg):
        r = energy_gradient(single, quartic, focusing_cfg, np.array([1.0]))
        assert r.values == pytest.approx([0.0], abs=1e-15)

    def test_matches_central_differences(self, random_graphs, quartic):
        rng = np.random.default_rng(14)
        eps = 1e-5
        for g in random_graphs:
            cfg = SolverConfig(kappa=1, lam=0.7)
            for _ in range(50):
                u = rng.standard_normal(g.n)
                h = rng.standard_normal(g.n)
                fd = (
                    energy(g, quartic, cfg, u + eps * h) - energy(g, quartic, cfg, u - eps * h)
                ) / (2 * eps)
                pairing = float(np.dot(g.m * energy_gradient(g, quartic, cfg, u).values, h))
                assert fd == pytest.approx(pairing, rel=1e-6, abs=1e-10)


class TestInnerMaximize:
    def test_single_vertex_ray(self, single, quartic):
        cfg = SolverConfig(kappa=1, lam=0.0)
        spec = eigensolve(assemble(single), 1)
        spl = split(spec, 0.0)
        out = inner_maximize(single, quartic, cfg, spec, spl, np.array([2.0]))
        assert abs(out.u.values[0]) == pytest.approx(1.0, abs=1e-10)
        assert out.value == pytest.approx(0.25, abs=1e-12)
        assert out.second_order_ok

    def test_two_vertex_symmetric_direction(self, two_vertex, quartic):
        cfg = SolverConfig(kappa=1, lam=0.0)
        spec = eigensolve(assemble(two_vertex), 2)
        spl = split(spec, 0.0)
        out = inner_maximize(two_vertex, quartic, cfg, spec, spl, np.array([1.0, 1.0]))
        assert out.value == pytest.approx(0.5, abs=1e-11)
        assert np.abs(out.u.values) == pytest.approx([1.0, 1.0], abs=1e-9)

    def test_nehari_residuals_at_maximizer(self, p3, quartic):
        cfg = SolverConfig(kappa=-1, lam=1.5)
        spec = eigensolve(assemble(p3), 3)
        spl = split(spec, 1.5)
        out = inner_maximize(p3, quartic, cfg, spec, spl, spec.eigenvectors[:, 0])
        r = energy_gradient(p3, quartic, cfg, out.u).values
        ray = abs(float(np.dot(p3.m * r, out.u.values)))
        f_basis = spec.eigenvectors[:, [1, 2]]
        f_res = float(np.max(np.abs(f_basis.T @ (p3.m * r))))
        assert ray <= 1e-9
        assert f_res <= 1e-9

    def test_direction_in_f_rejected(self, p3, quartic):
        cfg = SolverConfig(kappa=-1, lam=1.5)
        spec = eigensolve(assemble(p3), 3)
        spl = split(spec, 1.5)
        # eigenvector above lambda lies inside F for the defocusing case
        with pytest.raises(SolverError):
            inner_maximize(p3, quartic, cfg, spec, spl, spec.eigenvectors[:, 2])


class TestGroundState:
    def test_single_vertex_closed_form(self, single, quartic):
        res = ground_state(single, quartic, SolverConfig(kappa=1, lam=0.0))
        assert res.status == "converged"
        assert abs(res.u.values[0]) == pytest.approx(1.0, abs=1e-9)
        assert res.energy == pytest.approx(0.25, abs=1e-9)
        assert res.level == pytest.approx(0.25, abs=1e-9)

    @pytest.mark.parametrize("lam", [0.0, 0.5, 0.9, 0.99])
    def test_single_vertex_branch(self, single, quartic, lam):
        res = ground_state(single, quartic, SolverConfig(kappa=1, lam=lam))
        assert abs(res.u.values[0]) == pytest.approx(np.sqrt(1 - lam), abs=1e-8)

    def test_two_vertex_against_enumeration(self, two_vertex, quartic):
        res = ground_state(two_vertex, quartic, SolverConfig(kappa=1, lam=0.0))
        points = find_critical_points(two_vertex, quartic, 0.0, 1, n_starts=64)
        cfg = SolverConfig(kappa=1, lam=0.0)
        levels = [energy(two_vertex, quartic, cfg, u) for u in points]
        ground = min(lv for lv in levels if lv > 1e-9)
        assert ground == pytest.approx(0.5, abs=1e-8)
        assert res.energy == pytest.approx(ground, abs=1e-8)
        assert np.abs(res.u.values) == pytest.approx([1.0, 1.0], abs=1e-4)

    def test_p3_defocusing_against_multistart_oracle(self, p3, quartic):
        res = ground_state(p3, quartic, SolverConfig(kappa=-1, lam=1.5))
        assert res.status == "converged"
        assert res.level > 0
        assert res.residual_grad <= 1e-9
        assert max(res.nehari_residuals) <= 1e-9
        points = find_critical_points(p3, quartic, 1.5, -1, n_starts=64)
        cfg = SolverConfig(kappa=-1, lam=1.5)
        levels = [-energy(p3, quartic, cfg, u) for u in points]
        positive = [lv for lv in levels if lv > 1e-9]
        assert positive, "oracle found no nontrivial critical points"
        assert res.level == pytest.approx(min(positive), abs=1e-8)

    def test_defocusing_below_bottom_gives_trivial(self, p3, quartic):
        res = ground_state(p3, quartic, SolverConfig(kappa=-1, lam=0.5))
        assert res.status == "no_nontrivial"
        assert res.norms["E"] == 0.0

    def test_level_positive_and_certified(self, random_graphs, quartic):
        for g in random_graphs[:2]:
            spec = eigensolve(assemble(g), g.n)
            lam = 0.5 * float(spec.eigenvalues[0])
            res = ground_state(g, quartic, SolverConfig(kappa=1, lam=lam, n_starts=4), spec=spec)
            assert res.status == "converged"
            assert res.level > 0
            assert res.residual_grad <= 1e-9

    def test_minimax_upper_bound_property(self, p3, quartic):
        cfg = SolverConfig(kappa=1, lam=0.5)
        spec = eigensolve(assemble(p3), 3)
        spl = split(spec, 0.5)
        res = ground_state(p3, quartic, cfg, spec=spec)
        rng = np.random.default_rng(15)
        for _ in range(10):
            w = rng.standard_normal(3)
            out = inner_maximize(p3, quartic, cfg, spec, spl, w)
            assert res.level <= out.value + 1e-9

    def test_sign_pair_symmetry(self, p3, quartic):
        cfg = SolverConfig(kappa=1, lam=0.5)
        res = ground_state(p3, quartic, cfg)
        flipped = energy(p3, quartic, cfg, -res.u.values)
        assert flipped == pytest.approx(res.energy, rel=1e-12)

    def test_deterministic_given_seed(self, p3, quartic):
        cfg = SolverConfig(kappa=1, lam=0.5, seed=7)
        a = ground_state(p3, quartic, cfg)
        b = ground_state(p3, quartic, cfg)
        assert np.array_equal(a.u.values, b.u.values)
        assert a.energy == b.energy

    def test_threads_match_serial(self, p3, quartic):
        serial = ground_state(p3, quartic, SolverConfig(kappa=1, lam=0.5, seed=3))
        threaded = ground_state(p3, quartic, SolverConfig(kappa=1, lam=0.5, seed=3, threads=4))
        assert serial.energy == pytest.approx(threaded.energy, rel=1e-12)
        assert serial.u.values == pytest.approx(threaded.u.values, abs=1e-10)

    def test_bad_config_rejected(self):
        with pytest.raises(ConfigError):
            SolverConfig(kappa=2, lam=0.0)
        with pytest.raises(ConfigError):
            SolverConfig(kappa=1, lam=0.0, tol_grad=-1.0)


class TestVerifyNoSolution:
    def test_p3_collapses(self, p3, quartic):
        spec = eigensolve(assemble(p3), 3)
        report = verify_no_solution(p3, quartic, spec, 0.5)
        assert report.passed
        assert all(r.final_norm_E < 1e-6 for r in report.runs)

    def test_boundary_lambda(self, p3, quartic):
        spec = eigensolve(assemble(p3), 3)
        report = verify_no_solution(p3, quartic, spec, float(spec.eigenvalues[0]))
        assert report.passed

    def test_positivity_sampling(self, p3, quartic):
        spec = eigensolve(assemble(p3), 3)
        report = verify_no_solution(p3, quartic, spec, 0.5, n_samples=1000)
        assert report.positivity_min > 0

    def test_rejects_lambda_above_bottom(self, p3, quartic):
        spec = eigensolve(assemble(p3), 3)
        with pytest.raises(ConfigError):
            verify_no_solution(p3, quartic, spec, 1.5)


class TestCriticalValueBounds:
    def test_single_vertex_saturates(self, single, quartic):
        res = ground_state(single, quartic, SolverConfig(kappa=1, lam=0.0))
        spec = eigensolve(assemble(single), 1)
        report = check_critical_value_bounds(res, quartic, split(spec, 0.0))
        assert not report.skipped
        assert report.c1 == pytest.approx(4.0)
        assert report.lp_power == pytest.approx(report.bound_62, rel=1e-9)

    def test_trivial_solution_skipped(self, p3, quartic):
        res = ground_state(p3, quartic, SolverConfig(kappa=-1, lam=0.5))
        spec = eigensolve(assemble(p3), 3)
        report = check_critical_value_bounds(res, quartic, split(spec, 0.5))
        assert report.skipped

    def test_holds_on_random_graph(self, quartic):
        g = random_connected_graph(10, seed=21)
        spec = eigensolve(assemble(g), 10)
        lam = 0.7 * float(spec.eigenvalues[0])
        res = ground_state(g, quartic, SolverConfig(kappa=1, lam=lam, n_starts=4), spec=spec)
        report = check_critical_value_bounds(res, quartic, split(spec, lam))
        assert report.ok_62
        assert report.c2_empirical > 0
