"""Shift selection and feedback-gain synthesis.

The normalization T B = B pins the gains: with x_n = -K_n b_n, projecting
on the bi-orthogonal family and cancelling b_p gives the linear system

    sum_n x_n / (lambda_n - lambda_p + lambda) = 1   for every p <= N,

whose matrix is the same Cauchy-like matrix whose columns are the shifted
resolvent sums.  Gains come out either from a pivoted direct solve or from
the fixed-point accumulation x = lambda * 1 + sum of correction sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import IterationDiverged, SolverError
from .jsonio import cpairs, from_cpairs
from .spectral_core import SpectralBranch, SpectralSystem

__all__ = [
    "ShiftSelection",
    "BranchGains",
    "FeedbackLaw",
    "select_shift",
    "resolvent_column",
    "resolvent_matrix",
    "cauchy_system_matrix",
    "solve_gains_direct",
    "solve_gains_iterative",
    "synthesize_feedback",
    "beta_reduced_gains",
    "inverse_gap_sum_profile",
    "law_to_json",
    "law_from_json",
]


@dataclass(frozen=True)
class ShiftSelection:
    """An accepted spectral shift and the clearance it achieves."""

    lam: float
    delta: float
    min_distance: float

    def __post_init__(self):
        if self.min_distance < self.delta:
            raise ValueError("accepted shift must clear the requested margin")


def select_shift(system: SpectralSystem, lambda0: float, delta: float,
                 search_width_factor: float = 100.0) -> ShiftSelection:
    """Smallest admissible shift >= lambda0 on a delta/2 scan grid.

    Accepts lam when min over branches and n, p of |lambda_n - lambda_p
    + lam| >= delta; the grid step delta/2 cannot skip an admissible
    window of width delta.
    """
    if lambda0 <= 0 or delta <= 0:
        raise ValueError("lambda0 and delta must be positive")
    diffs = [
        (b.eigenvalues[:, None] - b.eigenvalues[None, :]).ravel()
        for b in system.branches
    ]
    all_diffs = np.concatenate(diffs)
    steps = int(np.ceil(search_width_factor * delta / (delta / 2.0))) + 1
    for j in range(steps):
        lam = lambda0 + j * delta / 2.0
        dist = float(np.min(np.abs(all_diffs + lam)))
        if dist >= delta:
            return ShiftSelection(lam=lam, delta=delta, min_distance=dist)
    raise SolverError(
        f"no admissible shift in [{lambda0}, {lambda0 + search_width_factor * delta}]: "
        "eigenvalue differences cluster too densely for the requested margin")


def resolvent_column(branch: SpectralBranch, lam: float, n: int) -> np.ndarray:
    """Coefficient vector with p-th entry 1 / (lambda_n - lambda_p + lam)."""
    if not 1 <= n <= branch.N:
        raise ValueError(f"mode index {n} outside 1..{branch.N}")
    return 1.0 / (branch.eigenvalues[n - 1] - branch.eigenvalues + lam)


def cauchy_system_matrix(branch: SpectralBranch, lam: float) -> np.ndarray:
    """Matrix C[p][n] = 1 / (lambda_n - lambda_p + lam).

    Column n is the shifted resolvent sum of mode n; the diagonal is the
    constant 1/lam.
    """
    lam_n = branch.eigenvalues[None, :]
    lam_p = branch.eigenvalues[:, None]
    denom = lam_n - lam_p + lam
    if np.any(denom == 0):
        raise SolverError(f"shift {lam} hits an eigenvalue difference exactly")
    return 1.0 / denom


def resolvent_matrix(branch: SpectralBranch, lam: float):
    """The resolvent-sum operator and its split (identity/lam, zero-diagonal rest)."""
    S = cauchy_system_matrix(branch, lam)
    S_c = S - np.eye(branch.N) / lam
    return S, S_c


def _products_to_gains(branch: SpectralBranch, lam: float, x: np.ndarray,
                       method: str, tb_residual: float,
                       iterations: Optional[int] = None,
                       history: Optional[np.ndarray] = None) -> "BranchGains":
    gains = -x / branch.control_coeffs
    return BranchGains(branch_index=branch.index, lam=float(lam), method=method,
                       gains=gains, products=x, tb_residual=float(tb_residual),
                       iterations=iterations, history=history)


@dataclass(frozen=True)
class BranchGains:
    """Feedback gains for one branch.

    gains     : K_n = K(phi_n).
    products  : x_n = -K_n b_n, the b-free normalization unknowns.
    corrections k_n = x_n - lam measure the distance from the single-mode
    exact value; their supremum is reported by the diagnostics module.
    """

    branch_index: int
    lam: float
    method: str
    gains: np.ndarray
    products: np.ndarray
    tb_residual: float
    iterations: Optional[int] = None
    history: Optional[np.ndarray] = None

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=complex).copy()
        x = np.asarray(self.products, dtype=complex).copy()
        g.flags.writeable = False
        x.flags.writeable = False
        object.__setattr__(self, "gains", g)
        object.__setattr__(self, "products", x)
        if g.shape != x.shape:
            raise ValueError("gains and products must align")

    @property
    def N(self) -> int:
        return len(self.gains)

    @property
    def corrections(self) -> np.ndarray:
        return self.products - self.lam

    @property
    def sup_product(self) -> float:
        return float(np.max(np.abs(self.products)))


@dataclass(frozen=True)
class FeedbackLaw:
    lam: float
    method: str
    branches: tuple

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        for bg in self.branches:
            if abs(bg.lam - self.lam) > 0:
                raise ValueError("all branch gains must share the law's shift")

    def branch(self, index: int) -> BranchGains:
        for bg in self.branches:
            if bg.branch_index == index:
                return bg
        raise KeyError(f"no gains for branch {index}")


_COND_LIMIT = 1e12


def solve_gains_direct(branch: SpectralBranch, lam: float) -> BranchGains:
    """Solve the truncated normalization system exactly (pivoted LU).

    Raises SolverError when the Cauchy-like matrix is singular to working
    precision, which signals a shift too close to an eigenvalue difference
    or a truncation too deep for the spectrum's gap profile.
    """
    C = cauchy_system_matrix(branch, lam)
    cond = np.linalg.cond(C)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SolverError(
            f"normalization matrix condition {cond:.3e} exceeds {_COND_LIMIT:.0e} "
            f"at shift {lam} (N={branch.N})")
    rhs = np.ones(branch.N, dtype=complex)
    x = scipy.linalg.solve(C, rhs)
    residual = np.linalg.norm(C @ x - rhs) / np.sqrt(branch.N)
    return _products_to_gains(branch, lam, x, "direct", residual)


def solve_gains_iterative(branch: SpectralBranch, lam: float,
                          max_iters: int = 500, tol: float = 1e-12) -> BranchGains:
    """Fixed-point gain accumulation x = lam + sum of correction sweeps.

    Starting from the single-mode value x == lam, each sweep applies
    e <- -lam * offdiag-resolvent @ e and accumulates.  Converges when the
    sweep operator contracts; otherwise raises IterationDiverged carrying
    the observed contraction ratio.
    """
    N = branch.N
    C = cauchy_system_matrix(branch, lam)
    sweep = -lam * (C - np.eye(N) / lam)          # zero-diagonal part scaled by -lam
    e = np.full(N, lam, dtype=complex)
    x = e.copy()
    sup_history = [float(np.max(np.abs(e)))]
    converged = False
    iterations = 0
    for i in range(1, max_iters + 1):
        e = sweep @ e
        x = x + e
        sup_history.append(float(np.max(np.abs(e))))
        iterations = i
        if sup_history[-1] < tol:
            converged = True
            break
    history = np.asarray(sup_history)
    if not converged and N > 1:
        tail = history[max(1, len(history) - 6):]
        ratio = float(np.exp(np.mean(np.diff(np.log(tail))))) if np.all(tail > 0) else float("inf")
        raise IterationDiverged(
            f"gain iteration did not reach tol={tol} within {max_iters} sweeps "
            f"(observed contraction ratio {ratio:.4f})",
            contraction_ratio=ratio, history=history)
    rhs = np.ones(N, dtype=complex)
    residual = np.linalg.norm(C @ x - rhs) / np.sqrt(N)
    return _products_to_gains(branch, lam, x, "iterative", residual,
                              iterations=iterations, history=history)


def synthesize_feedback(system: SpectralSystem, shift, method: str = "direct",
                        max_iters: int = 500, tol: float = 1e-12) -> FeedbackLaw:
    """Per-branch gain synthesis at a common shift.

    shift may be a ShiftSelection or a bare positive float.
    """
    lam = shift.lam if isinstance(shift, ShiftSelection) else float(shift)
    if method not in ("direct", "iterative"):
        raise ValueError(f"unknown method {method!r}")
    solver = solve_gains_direct if method == "direct" else solve_gains_iterative
    if method == "iterative":
        gains = tuple(solver(b, lam, max_iters=max_iters, tol=tol)
                      for b in system.branches)
    else:
        gains = tuple(solver(b, lam) for b in system.branches)
    return FeedbackLaw(lam=lam, method=method, branches=gains)


def beta_reduced_gains(branch: SpectralBranch, lam: float) -> BranchGains:
    """Synthesize through the beta = 0 reduction and map the gains back.

    Pre-scales the coefficients to n^beta b_n (flattening the declared
    decay), solves the flattened problem, then post-scales the gains by
    n^beta.  Agrees with the direct path to rounding because the
    normalization matrix does not involve the coefficients.
    """
    n = branch.mode_indices.astype(float)
    flat = SpectralBranch(branch.index, branch.eigenvalues,
                          branch.control_coeffs * n ** branch.beta,
                          branch.alpha, 0.0, branch.gamma)
    reduced = solve_gains_direct(flat, lam)
    gains = reduced.gains * n ** branch.beta
    x = -gains * branch.control_coeffs
    return BranchGains(branch_index=branch.index, lam=float(lam),
                       method="direct", gains=gains, products=x,
                       tb_residual=reduced.tb_residual)


def inverse_gap_sum_profile(branch: SpectralBranch, lam: float, s: float):
    """Off-diagonal inverse-gap sums measured against their envelope.

    For each p computes sum_{n != p} n^s / |lambda_n - lambda_p + lam|
    divided by p^(1-alpha+s) log(max(p,2)) + p^-alpha.  Returns
    (ratios, max over p in [8, N]).  Requires s < alpha - 1.
    """
    if s >= branch.alpha - 1.0:
        raise ValueError(f"s={s} must be below alpha-1={branch.alpha - 1.0}")
    N = branch.N
    n = branch.mode_indices.astype(float)
    inv = np.abs(cauchy_system_matrix(branch, lam))     # rows p, cols n
    np.fill_diagonal(inv, 0.0)
    lhs = inv @ (n ** s)
    p = n
    envelope = p ** (1.0 - branch.alpha + s) * np.log(np.maximum(p, 2.0)) + p ** (-branch.alpha)
    ratios = lhs / envelope
    tail_max = float(np.max(ratios[7:])) if N >= 8 else float(np.max(ratios))
    return ratios, tail_max


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def law_to_json(law: FeedbackLaw) -> dict:
    return {
        "lambda": float(law.lam),
        "method": law.method,
        "branches": [
            {
                "i": bg.branch_index,
                "gains": cpairs(bg.gains),
                "products_x": cpairs(bg.products),
                "tb_residual": float(bg.tb_residual),
            }
            for bg in law.branches
        ],
    }


def law_from_json(doc: dict) -> FeedbackLaw:
    try:
        lam = float(doc["lambda"])
        branches = tuple(
            BranchGains(branch_index=int(bd["i"]), lam=lam,
                        method=str(doc["method"]),
                        gains=from_cpairs(bd["gains"]),
                        products=from_cpairs(bd["products_x"]),
                        tb_residual=float(bd["tb_residual"]))
            for bd in doc["branches"]
        )
    except KeyError as exc:
        raise ValueError(f"law document missing field {exc}") from exc
    return FeedbackLaw(lam=lam, method=str(doc["method"]), branches=branches)
