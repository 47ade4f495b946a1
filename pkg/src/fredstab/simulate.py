"""Closed-loop and target dynamics in spectral coordinates.

Linear trajectories come either from the conjugated semigroup (exact up to
one linear solve per branch per sample) or from fixed-step RK4 as an
independent cross-check.  The semilinear torus model is integrated by a
Fourier-Galerkin scheme with implicit diagonal diffusion and explicit
convection and feedback.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import IntegratorError
from .spectral_core import SpectralSystem, sobolev_norm
from .synthesis import FeedbackLaw
from .transform import build_transform

__all__ = [
    "SimulationTrace",
    "DecayFit",
    "simulate_target",
    "simulate_closed_loop",
    "simulate_burgers",
    "fit_decay",
    "burgers_basin_search",
    "random_state",
    "trace_to_csv",
]


@dataclass(frozen=True)
class SimulationTrace:
    """Time grid, per-branch modal coefficients, and tracked norms.

    states[i] has shape (len(times), N_i).  norms maps a scale index r to
    the combined norm sequence (sum over branches in quadrature).
    """

    times: np.ndarray
    states: tuple
    norms: dict
    integrator: str
    dt: float
    real_defect: Optional[float] = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        states = tuple(np.asarray(s, dtype=complex) for s in self.states)
        for s in states:
            if s.shape[0] != len(t):
                raise ValueError("state history length must match the time grid")
            if not np.all(np.isfinite(s)):
                raise IntegratorError("non-finite state in trace (blow-up?)")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", states)

    def state_at(self, k: int) -> list:
        return [s[k] for s in self.states]

    def norm_series(self, r: float) -> np.ndarray:
        key = float(r)
        if key in self.norms:
            return self.norms[key]
        vals = np.array([
            np.sqrt(sum(sobolev_norm(s[k], r) ** 2 for s in self.states))
            for k in range(len(self.times))
        ])
        return vals


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential fit of a norm history."""

    mu_hat: float
    c_hat: float
    r2: float
    window: tuple


def _norm_table(times, states, r_list):
    table = {}
    for r in r_list:
        table[float(r)] = np.array([
            np.sqrt(sum(sobolev_norm(s[k], r) ** 2 for s in states))
            for k in range(len(times))
        ])
    return table


def _states_for(system: SpectralSystem, v0) -> list:
    if isinstance(v0, (list, tuple)):
        parts = [np.asarray(p, dtype=complex) for p in v0]
    else:
        parts = [np.asarray(v0, dtype=complex)]
    if len(parts) != system.m:
        raise ValueError(f"initial state needs {system.m} branch blocks")
    for part, b in zip(parts, system.branches):
        if len(part) != b.N:
            raise ValueError(
                f"branch {b.index} initial block has {len(part)} entries, expected {b.N}")
    return parts


def random_state(system: SpectralSystem, seed: int = 0, scale: float = 1.0,
                 ensure_first_mode: bool = True) -> list:
    """Reproducible complex Gaussian initial state, one block per branch.

    ensure_first_mode bumps any near-zero leading coefficient so slow
    modes (the constant torus mode in particular) participate.
    """
    rng = np.random.default_rng(seed)
    blocks = []
    for b in system.branches:
        z = rng.standard_normal(b.N) + 1j * rng.standard_normal(b.N)
        if ensure_first_mode and abs(z[0]) < 0.3:
            z[0] = 1.0 + 0.0j
        blocks.append(scale * z)
    return blocks


def simulate_target(system: SpectralSystem, lam: float, v0, times,
                    r_list=(0.0,)) -> SimulationTrace:
    """Exact modal solution of the shifted system: v_n(t) = e^{(lambda_n - lam) t} v_n(0)."""
    times = np.asarray(times, dtype=float)
    blocks = _states_for(system, v0)
    states = []
    for b, block in zip(system.branches, blocks):
        decay = np.exp((b.eigenvalues[None, :] - lam) * times[:, None])
        states.append(decay * block[None, :])
    norms = _norm_table(times, states, r_list)
    return SimulationTrace(times=times, states=tuple(states), norms=norms,
                           integrator="semigroup_exact", dt=0.0)


def _rk4_march(A: np.ndarray, u0: np.ndarray, times: np.ndarray, dt: float):
    out = np.empty((len(times), len(u0)), dtype=complex)
    u = u0.astype(complex)
    t = times[0]
    out[0] = u
    for k in range(1, len(times)):
        target = times[k]
        while t < target - 1e-12 * max(1.0, abs(target)):
            step = min(dt, target - t)
            k1 = A @ u
            k2 = A @ (u + 0.5 * step * k1)
            k3 = A @ (u + 0.5 * step * k2)
            k4 = A @ (u + step * k3)
            u = u + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += step
        out[k] = u
    return out


def simulate_closed_loop(system: SpectralSystem, law: FeedbackLaw, u0, times,
                         integrator: str = "semigroup_exact",
                         dt: float = 1e-4, r_list=(0.0,)) -> SimulationTrace:
    """Closed-loop trajectories under the synthesized feedback.

    semigroup_exact evaluates u(t) = T^{-1} diag(e^{(lambda_n - lam) t}) T u0
    branch by branch; rk4 integrates du/dt = (diag(lambda) + b K^T) u with
    a fixed step as an independent check.  The step must satisfy
    dt <= 2 / max |lambda_N| or the run is refused.
    """
    if integrator not in ("semigroup_exact", "rk4"):
        raise ValueError(f"unknown linear integrator {integrator!r}")
    times = np.asarray(times, dtype=float)
    blocks = _states_for(system, u0)
    states = []
    if integrator == "semigroup_exact":
        for b, block in zip(system.branches, blocks):
            T = build_transform(b, law.branch(b.index)).matrix
            lu = scipy.linalg.lu_factor(T)
            w = T @ block
            hist = np.empty((len(times), b.N), dtype=complex)
            for k, t in enumerate(times):
                v = np.exp((b.eigenvalues - law.lam) * t) * w
                hist[k] = scipy.linalg.lu_solve(lu, v)
            states.append(hist)
    else:
        stiff = max(float(np.max(np.abs(b.eigenvalues))) for b in system.branches)
        if stiff > 0 and dt > 2.0 / stiff:
            raise IntegratorError(
                f"rk4 step dt={dt} exceeds the stability guard 2/|lambda_N| = "
                f"{2.0 / stiff:.3e}; reduce dt or the truncation")
        for b, block in zip(system.branches, blocks):
            bg = law.branch(b.index)
            A = np.diag(b.eigenvalues) + np.outer(b.control_coeffs, bg.gains)
            states.append(_rk4_march(A, block, times, dt))
    norms = _norm_table(times, states, r_list)
    return SimulationTrace(times=times, states=tuple(states), norms=norms,
                           integrator=integrator, dt=dt if integrator == "rk4" else 0.0)


# ---------------------------------------------------------------------------
# semilinear torus dynamics
# ---------------------------------------------------------------------------

_SQRT_PI = np.sqrt(np.pi)
_SQRT_2PI = np.sqrt(2.0 * np.pi)


def _fourier_from_physical(u_phys: np.ndarray, N: int) -> np.ndarray:
    """Coefficients c_k, k = -N..N, of u = sum c_k e^{ikx} from grid samples."""
    grid = len(u_phys)
    if grid < 2 * N + 1:
        raise ValueError("physical grid too coarse for the requested modes")
    chat = np.fft.fft(u_phys) / grid
    c = np.zeros(2 * N + 1, dtype=complex)
    c[N] = chat[0]
    for k in range(1, N + 1):
        c[N + k] = chat[k]
        c[N - k] = chat[-k]
    return c


def _branch_coords(c: np.ndarray, N: int):
    """Sine/cosine modal blocks of a Fourier coefficient vector.

    Sine block a1[n-1] = <u, sin(nx)/sqrt(pi)>, n = 1..N; cosine block
    a2[0] = <u, 1/sqrt(2 pi)>, a2[j] = <u, cos(jx)/sqrt(pi)>, j = 1..N-1.
    """
    kp = c[N + 1:]                  # c_k, k = 1..N
    km = c[N - 1::-1]               # c_{-k}, k = 1..N
    a1 = 1j * _SQRT_PI * (kp - km)
    a2 = np.empty(N, dtype=complex)
    a2[0] = _SQRT_2PI * c[N]
    a2[1:] = _SQRT_PI * (kp[: N - 1] + km[: N - 1])
    return a1, a2


def _control_fourier(system: SpectralSystem, N: int):
    """Fourier footprints of the two control shapes.

    The shapes are synthesized from the branch coefficient sequences, so
    their modal pairings reproduce the system's control_coeffs exactly.
    """
    b1 = system.branches[0].control_coeffs
    b2 = system.branches[1].control_coeffs
    phi1 = np.zeros(2 * N + 1, dtype=complex)
    phi2 = np.zeros(2 * N + 1, dtype=complex)
    for n in range(1, N + 1):
        phi1[N + n] += b1[n - 1] * (-1j) / (2 * _SQRT_PI)
        phi1[N - n] += b1[n - 1] * 1j / (2 * _SQRT_PI)
    phi2[N] = b2[0] / _SQRT_2PI
    for n in range(1, N):
        phi2[N + n] += b2[n] / (2 * _SQRT_PI)
        phi2[N - n] += b2[n] / (2 * _SQRT_PI)
    return phi1, phi2


def simulate_burgers(system: SpectralSystem, law: Optional[FeedbackLaw], u0, times,
                     dt: float = 1e-4, r_list=(0.0,),
                     dealias: bool = False) -> SimulationTrace:
    """Semilinear torus simulation with quadratic convection and feedback.

    Requires the two-branch torus system.  State lives in torus Fourier
    coefficients c_k (k = -N..N); the convection term (u^2 / 2)_x is an
    exact coefficient convolution at truncation (the 2/3-rule cut is
    available but off by default); diffusion is implicit, convection and
    feedback explicit, first-order in time.  u0 is either a real physical
    sample vector or a complex coefficient vector of length 2N + 1.
    Non-finite growth aborts the run: the initial data left the local
    stability basin.
    """
    if system.m != 2:
        raise ValueError("semilinear simulation expects the two-branch torus model")
    N = system.branches[0].N
    if system.branches[1].N != N:
        raise ValueError("torus branches must share the truncation level")
    times = np.asarray(times, dtype=float)
    u0 = np.asarray(u0)
    if np.iscomplexobj(u0) and len(u0) == 2 * N + 1:
        c = u0.astype(complex)
    else:
        c = _fourier_from_physical(np.asarray(u0, dtype=float), N)
    k_axis = np.arange(-N, N + 1)
    phi1, phi2 = _control_fourier(system, N)
    if law is not None:
        K1 = law.branch(1).gains
        K2 = law.branch(2).gains
    cut = (np.abs(k_axis) <= (2 * N) // 3) if dealias else None

    def rhs_explicit(cv):
        work = cv * cut if dealias else cv
        conv = np.convolve(work, work)[N: 3 * N + 1]     # (u^2)_k at |k| <= N
        nl = -0.5j * k_axis * conv
        if dealias:
            nl = nl * cut
        if law is None:
            return nl
        a1, a2 = _branch_coords(cv, N)
        w1 = np.dot(K1, a1)
        w2 = np.dot(K2, a2)
        return nl + w1 * phi1 + w2 * phi2

    implicit = 1.0 / (1.0 + dt * k_axis.astype(float) ** 2)
    hist = np.empty((len(times), 2 * N + 1), dtype=complex)
    hist[0] = c
    defect = float(np.max(np.abs(c - np.conj(c[::-1]))))
    t = times[0]
    for k in range(1, len(times)):
        target = times[k]
        while t < target - 1e-12 * max(1.0, abs(target)):
            step = min(dt, target - t)
            scale = implicit if step == dt else 1.0 / (1.0 + step * k_axis.astype(float) ** 2)
            c = (c + step * rhs_explicit(c)) * scale
            t += step
            if not np.all(np.isfinite(c)):
                raise IntegratorError(
                    f"semilinear state blew up near t={t:.4g}: initial data "
                    "outside the local stability basin")
        hist[k] = c
        defect = max(defect, float(np.max(np.abs(c - np.conj(c[::-1])))))
    states1 = np.empty((len(times), N), dtype=complex)
    states2 = np.empty((len(times), N), dtype=complex)
    for k in range(len(times)):
        a1, a2 = _branch_coords(hist[k], N)
        states1[k] = a1
        states2[k] = a2
    norms = _norm_table(times, (states1, states2), r_list)
    return SimulationTrace(times=times, states=(states1, states2), norms=norms,
                           integrator="imex_euler", dt=dt, real_defect=defect)


def fit_decay(trace: SimulationTrace, r: float = 0.0,
              window: Optional[tuple] = None) -> DecayFit:
    """Fit ||u(t)|| ~ c e^{-mu t} on a window of the trace.

    Default window drops the first 10% of the horizon to let the
    conjugation transient settle.  Requires at least 4 samples with
    strictly positive norms.
    """
    t = trace.times
    norms = trace.norm_series(r)
    if window is None:
        span = t[-1] - t[0]
        window = (t[0] + 0.1 * span, t[-1])
    lo, hi = window
    mask = (t >= lo) & (t <= hi)
    if mask.sum() < 4:
        raise ValueError(f"decay window {window} holds {int(mask.sum())} samples (< 4)")
    if np.any(norms[mask] <= 0):
        raise ValueError("nonpositive norms in the fit window (zero state?)")
    tt = t[mask]
    yy = np.log(norms[mask])
    slope, intercept = np.polyfit(tt, yy, 1)
    pred = slope * tt + intercept
    ss_res = float(np.sum((yy - pred) ** 2))
    ss_tot = float(np.sum((yy - yy.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    return DecayFit(mu_hat=float(-slope), c_hat=float(np.exp(intercept)),
                    r2=r2, window=(float(lo), float(hi)))


def burgers_basin_search(system: SpectralSystem, law, u0_shape, times,
                         dt: float = 1e-4, lo: float = 1e-4, hi: float = 1.0,
                         bisections: int = 8) -> dict:
    """Bisect the initial amplitude between decay and blow-up outcomes.

    u0_shape is a unit-amplitude coefficient or physical profile; the
    returned dict reports the largest amplitude that decayed and the
    smallest that blew up (or the bracket end if no blow-up was seen).
    The threshold is reported, not asserted: it is an empirical proxy for
    the local basin, not a certified radius.
    """
    u0_shape = np.asarray(u0_shape)

    def outcome(amplitude: float) -> bool:
        try:
            trace = simulate_burgers(system, law, amplitude * u0_shape, times, dt=dt)
        except IntegratorError:
            return False
        n = trace.norm_series(0.0)
        return bool(n[-1] <= n[0])

    if not outcome(lo):
        return {"decayed": None, "blew_up": lo, "evaluations": 1}
    if outcome(hi):
        return {"decayed": hi, "blew_up": None, "evaluations": 2}
    good, bad = lo, hi
    evals = 2
    for _ in range(bisections):
        mid = np.sqrt(good * bad)           # geometric bisection over amplitudes
        evals += 1
        if outcome(mid):
            good = mid
        else:
            bad = mid
    return {"decayed": good, "blew_up": bad, "evaluations": evals}


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def trace_to_csv(trace: SimulationTrace, modes_path, norms_path) -> None:
    """Long-format modal history and a wide norm summary.

    modes: header t,branch,n,re,im.  norms: header t,norm_r{value},...
    """
    with open(modes_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "branch", "n", "re", "im"])
        for k, t in enumerate(trace.times):
            for i, block in enumerate(trace.states, start=1):
                for n, z in enumerate(block[k], start=1):
                    writer.writerow([repr(float(t)), i, n,
                                     repr(float(z.real)), repr(float(z.imag))])
    r_keys = sorted(trace.norms)
    with open(norms_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"norm_r{r:g}" for r in r_keys])
        for k, t in enumerate(trace.times):
            writer.writerow([repr(float(t))] +
                            [repr(float(trace.norms[r][k])) for r in r_keys])
