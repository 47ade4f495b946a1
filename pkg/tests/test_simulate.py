import numpy as np
import pytest

from fredstab import (IntegratorError, SpectralBranch, SpectralSystem,
                      build_transform, burgers_basin_search, fit_decay,
                      random_state, simulate_burgers, simulate_closed_loop,
                      simulate_target, synthesize_feedback)
from fredstab.models import heat_torus_model
from fredstab.simulate import trace_to_csv

from conftest import heat_branch, schrodinger_branch


def single_mode_system():
    return SpectralSystem(
        branches=(SpectralBranch(1, [-1.0], [1.0], alpha=2.0),), label="one")


class TestTarget:
    def test_scalar_exponential(self):
        system = SpectralSystem(branches=(heat_branch(4),), label="h")
        trace = simulate_target(system, 2.5, [np.array([1, 0, 0, 0], dtype=complex)],
                                [0.0, 1.0])
        assert trace.states[0][1, 0] == pytest.approx(np.exp(-3.5), abs=1e-15)

    def test_imaginary_spectrum_modulus_identity(self):
        system = SpectralSystem(branches=(schrodinger_branch(8),), label="s")
        v0 = [np.ones(8, dtype=complex)]
        trace = simulate_target(system, 1.0, v0, [0.0, 0.5, 1.0])
        for k, t in enumerate(trace.times):
            np.testing.assert_allclose(np.abs(trace.states[0][k]),
                                       np.exp(-1.0 * t) * np.ones(8), atol=1e-14)

    def test_monotone_norm_decay_real_spectrum(self):
        system = SpectralSystem(branches=(heat_branch(8),), label="h")
        v0 = [np.ones(8, dtype=complex)]
        trace = simulate_target(system, 2.0, v0, np.linspace(0, 1, 17))
        norms = trace.norm_series(0.0)
        assert np.all(np.diff(norms) < 0)


class TestClosedLoop:
    def test_single_mode_both_integrators(self):
        system = single_mode_system()
        law = synthesize_feedback(system, 2.0)
        times = np.linspace(0, 1, 11)
        u0 = [np.array([1.0 + 0.0j])]
        exact = np.exp(-3.0 * times)
        for integrator in ("semigroup_exact", "rk4"):
            trace = simulate_closed_loop(system, law, u0, times,
                                         integrator=integrator, dt=1e-3)
            np.testing.assert_allclose(trace.states[0][:, 0], exact, atol=1e-6)

    def test_exact_vs_rk4_heat(self):
        system = heat_torus_model(32)
        law = synthesize_feedback(system, 2.5)
        u0 = random_state(system, seed=0)
        times = np.linspace(0, 1, 33)
        tr_ex = simulate_closed_loop(system, law, u0, times)
        tr_rk = simulate_closed_loop(system, law, u0, times,
                                     integrator="rk4", dt=1e-4)
        for a, b in zip(tr_rk.states, tr_ex.states):
            for k in range(len(times)):
                denom = max(np.linalg.norm(b[k]), 1e-30)
                assert np.linalg.norm(a[k] - b[k]) / denom < 1e-4

    def test_conjugacy_to_target(self):
        # T u(t) must follow the shifted diagonal flow started from T u0
        system = heat_torus_model(16)
        law = synthesize_feedback(system, 2.5)
        u0 = random_state(system, seed=1)
        times = np.linspace(0, 1, 9)
        trace = simulate_closed_loop(system, law, u0, times)
        for b, block0, hist in zip(system.branches, u0, trace.states):
            T = build_transform(b, law.branch(b.index)).matrix
            w0 = T @ block0
            for k, t in enumerate(times):
                v = np.exp((b.eigenvalues - 2.5) * t) * w0
                assert np.linalg.norm(T @ hist[k] - v) <= 1e-8 * np.linalg.norm(block0)

    def test_rk4_step_guard(self):
        system = heat_torus_model(16)
        law = synthesize_feedback(system, 2.5)
        with pytest.raises(IntegratorError, match="stability guard"):
            simulate_closed_loop(system, law, random_state(system), [0.0, 1.0],
                                 integrator="rk4", dt=0.1)

    def test_decay_rate_bounded_by_spectral_abscissa(self):
        system = heat_torus_model(16)
        law = synthesize_feedback(system, 2.5)
        u0 = random_state(system, seed=2)
        times = np.linspace(0, 6, 193)
        trace = simulate_closed_loop(system, law, u0, times)
        fit = fit_decay(trace, window=(3.0, 6.0))
        assert fit.mu_hat >= 2.5 - 0.05


class TestFitDecay:
    def test_single_exponential_exact(self):
        system = SpectralSystem(branches=(heat_branch(4),), label="h")
        trace = simulate_target(system, 2.5, [np.array([1, 0, 0, 0], dtype=complex)],
                                np.linspace(0, 1, 33))
        fit = fit_decay(trace)
        assert fit.mu_hat == pytest.approx(3.5, abs=1e-6)
        assert fit.r2 > 1 - 1e-12

    def test_zero_state_rejected(self):
        system = SpectralSystem(branches=(heat_branch(4),), label="h")
        trace = simulate_target(system, 2.5, [np.zeros(4, dtype=complex)],
                                np.linspace(0, 1, 9))
        with pytest.raises(ValueError, match="nonpositive norms"):
            fit_decay(trace)

    def test_too_few_samples_rejected(self):
        system = SpectralSystem(branches=(heat_branch(4),), label="h")
        trace = simulate_target(system, 2.5, [np.ones(4, dtype=complex)],
                                np.linspace(0, 1, 9))
        with pytest.raises(ValueError, match="< 4"):
            fit_decay(trace, window=(0.9, 1.0))


@pytest.fixture(scope="module")
def heat_system_and_law():
    system = heat_torus_model(16)
    law = synthesize_feedback(system, 3.25)
    return system, law


class TestBurgers:
    def test_zero_stays_zero(self, heat_system_and_law):
        system, law = heat_system_and_law
        u0 = np.zeros(33, dtype=complex)
        trace = simulate_burgers(system, law, u0, np.linspace(0, 0.1, 6), dt=1e-3)
        assert max(np.max(np.abs(s)) for s in trace.states) <= 1e-14

    def test_open_loop_linear_regime(self, heat_system_and_law):
        system, _ = heat_system_and_law
        # u0 = delta sin(x): mode -1 dominates, constant mode absent
        u0 = np.zeros(33, dtype=complex)
        u0[17] = -0.5e-3 * 1j
        u0[15] = 0.5e-3 * 1j
        trace = simulate_burgers(system, None, u0, np.linspace(0, 1, 51), dt=1e-3)
        fit = fit_decay(trace, window=(0.1, 1.0))
        assert fit.mu_hat == pytest.approx(1.0, abs=0.02)

    def test_open_loop_constant_mode_undamped(self, heat_system_and_law):
        system, _ = heat_system_and_law
        u0 = np.zeros(33, dtype=complex)
        u0[16] = 1e-3          # constant mode
        u0[17] = -0.25e-3 * 1j
        u0[15] = 0.25e-3 * 1j
        trace = simulate_burgers(system, None, u0, np.linspace(0, 1, 11), dt=1e-3)
        const = trace.states[1][:, 0]
        np.testing.assert_allclose(const, const[0] * np.ones_like(const), rtol=1e-6)

    def test_closed_loop_small_data_decay(self, heat_system_and_law):
        system, law = heat_system_and_law
        rng = np.random.default_rng(0)
        u0_phys = 1e-3 * np.sin(np.linspace(0, 2 * np.pi, 128, endpoint=False))
        trace = simulate_burgers(system, law, u0_phys, np.linspace(0, 1, 41),
                                 dt=2e-4)
        fit = fit_decay(trace, window=(0.1, 1.0))
        assert fit.mu_hat >= 3.25 - 1.0 - 0.1
        assert trace.real_defect <= 1e-10

    def test_physical_and_modal_input_agree(self, heat_system_and_law):
        system, law = heat_system_and_law
        x = np.linspace(0, 2 * np.pi, 256, endpoint=False)
        u0_phys = 1e-3 * (np.sin(x) + 0.5 * np.cos(2 * x))
        c = np.zeros(33, dtype=complex)
        c[17], c[15] = -0.5e-3 * 1j, 0.5e-3 * 1j
        c[18] = c[14] = 0.25e-3
        times = np.linspace(0, 0.2, 5)
        t1 = simulate_burgers(system, law, u0_phys, times, dt=1e-3)
        t2 = simulate_burgers(system, law, c, times, dt=1e-3)
        for a, b in zip(t1.states, t2.states):
            np.testing.assert_allclose(a, b, atol=1e-12)

    def test_halving_amplitude_does_not_hurt_rate(self, heat_system_and_law):
        system, law = heat_system_and_law
        x = np.linspace(0, 2 * np.pi, 128, endpoint=False)
        shape = np.sin(x) + 0.3 * np.cos(x)
        times = np.linspace(0, 1, 41)
        fits = []
        for amp in (1e-3, 0.5e-3):
            trace = simulate_burgers(system, law, amp * shape, times, dt=2e-4)
            fits.append(fit_decay(trace, window=(0.1, 1.0)).mu_hat)
        assert fits[1] >= fits[0] - 0.05

    def test_blow_up_detected(self, heat_system_and_law):
        system, _ = heat_system_and_law
        # strong anti-diffusive push: feedback with huge positive gains
        x = np.linspace(0, 2 * np.pi, 128, endpoint=False)
        with pytest.raises(IntegratorError, match="basin|blew up"):
            simulate_burgers(system, None, 2e3 * np.sin(x),
                             np.linspace(0, 2.0, 21), dt=5e-3)

    def test_basin_search_reports_bracket(self, heat_system_and_law):
        system, law = heat_system_and_law
        x = np.linspace(0, 2 * np.pi, 128, endpoint=False)
        result = burgers_basin_search(system, law, np.sin(x),
                                      np.linspace(0, 0.5, 11), dt=1e-3,
                                      lo=1e-3, hi=4e3, bisections=4)
        assert result["decayed"] is not None
        assert result["evaluations"] >= 2

    def test_wrong_branch_count_rejected(self):
        system = SpectralSystem(branches=(heat_branch(8),), label="h")
        with pytest.raises(ValueError, match="two-branch"):
            simulate_burgers(system, None, np.zeros(17, dtype=complex), [0.0, 0.1])


class TestCsvExport:
    def test_headers_and_shape(self, tmp_path):
        system = heat_torus_model(4)
        law = synthesize_feedback(system, 2.5)
        trace = simulate_closed_loop(system, law, random_state(system), [0.0, 0.5, 1.0],
                                     r_list=(0.0, 1.0))
        modes = tmp_path / "m.csv"
        norms = tmp_path / "n.csv"
        trace_to_csv(trace, modes, norms)
        lines = modes.read_text().splitlines()
        assert lines[0] == "t,branch,n,re,im"
        assert len(lines) == 1 + 3 * 2 * 4
        nlines = norms.read_text().splitlines()
        assert nlines[0] == "t,norm_r0,norm_r1"
