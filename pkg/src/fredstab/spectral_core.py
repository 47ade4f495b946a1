"""Domain types for diagonalizable control systems in spectral coordinates.

A system is described branch by branch: each branch carries a simple
(pairwise-distinct) eigenvalue sequence, the control coefficients obtained
by pairing the input shape with the bi-orthogonal eigenvector family, and
the growth exponents (alpha, beta, gamma) the synthesis relies on.  All
computation downstream works on these coefficient sequences; eigenvectors
never appear explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AssumptionError
from .jsonio import cpairs, from_cpairs

__all__ = [
    "SpectralBranch",
    "SpectralSystem",
    "WeightedNorm",
    "GrowthCheck",
    "GapCheck",
    "ControlCheck",
    "AssumptionVerdict",
    "ControllabilityClassification",
    "sobolev_norm",
    "verify_growth",
    "verify_gap",
    "verify_control",
    "verify_assumptions",
    "classify_controllability",
    "admissible_r_interval",
    "branch_split",
    "system_to_json",
    "system_from_json",
]


def _as_readonly_complex(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=complex).copy()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SpectralBranch:
    """One simple-spectrum component of a diagonalizable system.

    index          : 1-based branch label within the parent system.
    eigenvalues    : lambda_1..lambda_N, pairwise distinct (units 1/time).
    control_coeffs : b_1..b_N, projections of the input shape on the
                     bi-orthogonal family; all nonzero (approximate
                     controllability).
    alpha          : eigenvalue growth order, |lambda_n| ~ n^alpha, > 1.
    beta           : coefficient decay order, |b_n| ~ n^(-beta).
    gamma          : allowed upward slack in |b_n| n^beta, in [0, (alpha-1)/2).
    """

    index: int
    eigenvalues: np.ndarray
    control_coeffs: np.ndarray
    alpha: float
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues",
                           _as_readonly_complex(self.eigenvalues, "eigenvalues"))
        object.__setattr__(self, "control_coeffs",
                           _as_readonly_complex(self.control_coeffs, "control_coeffs"))
        if self.index < 1:
            raise ValueError("branch index must be >= 1")
        if len(self.eigenvalues) != len(self.control_coeffs):
            raise ValueError("eigenvalues and control_coeffs must have equal length")
        if len(self.eigenvalues) < 1:
            raise ValueError("a branch needs at least one mode")
        if self.alpha <= 1.0:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if not 0.0 <= self.gamma < (self.alpha - 1.0) / 2.0:
            raise ValueError(
                f"gamma={self.gamma} outside [0, (alpha-1)/2) = [0, {(self.alpha - 1) / 2})")
        lam = self.eigenvalues
        # pairwise distinctness; duplicated eigenvalues break the branch decomposition
        order = np.lexsort((lam.imag, lam.real))
        sorted_lam = lam[order]
        dup = np.nonzero(np.diff(sorted_lam) == 0)[0]
        if dup.size:
            n, p = int(order[dup[0]]) + 1, int(order[dup[0] + 1]) + 1
            raise ValueError(
                f"eigenvalues at positions n={n}, p={p} coincide ({sorted_lam[dup[0]]})")
        zero = np.nonzero(self.control_coeffs == 0)[0]
        if zero.size:
            raise AssumptionError(
                f"control coefficient b_{zero[0] + 1} is zero: "
                "approximate controllability is lost on this branch")

    @property
    def N(self) -> int:
        return len(self.eigenvalues)

    @property
    def mode_indices(self) -> np.ndarray:
        return np.arange(1, self.N + 1)

    def rescaled(self, factor: complex) -> "SpectralBranch":
        """Same branch with all control coefficients multiplied by factor."""
        if factor == 0:
            raise ValueError("rescaling factor must be nonzero")
        return SpectralBranch(self.index, self.eigenvalues,
                              self.control_coeffs * factor,
                              self.alpha, self.beta, self.gamma)

    def truncated(self, n: int) -> "SpectralBranch":
        """Same branch restricted to the first n modes."""
        if not 1 <= n <= self.N:
            raise ValueError(f"truncation {n} outside 1..{self.N}")
        return SpectralBranch(self.index, self.eigenvalues[:n],
                              self.control_coeffs[:n],
                              self.alpha, self.beta, self.gamma)


@dataclass(frozen=True)
class SpectralSystem:
    """A labelled collection of branches X = X_1 + ... + X_m."""

    branches: tuple
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if not self.branches:
            raise ValueError("a system needs at least one branch")
        indices = [b.index for b in self.branches]
        if indices != list(range(1, len(indices) + 1)):
            raise ValueError(f"branch indices must be 1..m without gaps, got {indices}")

    @property
    def m(self) -> int:
        return len(self.branches)

    @property
    def N(self) -> int:
        """Common truncation level (smallest branch length)."""
        return min(b.N for b in self.branches)

    @property
    def uniform_truncation(self) -> bool:
        return len({b.N for b in self.branches}) == 1


@dataclass(frozen=True)
class WeightedNorm:
    """Coefficient norm (sum n^{2r} |f_n|^2)^{1/2} on the Hilbert scale."""

    r: float

    def __call__(self, coeffs) -> float:
        return sobolev_norm(coeffs, self.r)


def sobolev_norm(coeffs, r: float) -> float:
    """Weighted coefficient norm (sum_n n^{2r} |f_n|^2)^{1/2}, n starting at 1.

    r = 0 reduces to the Euclidean norm of the coefficient vector.
    """
    arr = np.asarray(coeffs, dtype=complex).ravel()
    if arr.size == 0:
        return 0.0
    n = np.arange(1, arr.size + 1, dtype=float)
    return float(np.sqrt(np.sum(n ** (2.0 * r) * np.abs(arr) ** 2)))


# ---------------------------------------------------------------------------
# assumption checks
# ---------------------------------------------------------------------------

def _loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of log y against log x (positive entries only)."""
    mask = (x > 0) & (y > 0)
    if mask.sum() < 2:
        return float("nan")
    lx, ly = np.log(x[mask]), np.log(y[mask])
    return float(np.polyfit(lx, ly, 1)[0])


def _fit_window(N: int) -> slice:
    # asymptotic conditions: fit on the upper three quarters of the indices
    return slice(max(N // 4, 1), N)


@dataclass(frozen=True)
class GrowthCheck:
    ok: bool
    c_low: float
    c_high: float
    ratio: float
    alpha_hat: float
    witness_low: int
    witness_high: int
    ratio_cap: float


@dataclass(frozen=True)
class GapCheck:
    ok: bool
    constant: float
    witness: tuple
    floor: float


@dataclass(frozen=True)
class ControlCheck:
    ok: bool
    c1_hat: float
    c2_hat: float
    beta_hat: float
    gamma_hat: float
    witness_min: int
    witness_max: int


@dataclass(frozen=True)
class AssumptionVerdict:
    growth: Optional[GrowthCheck] = None
    gap: Optional[GapCheck] = None
    control: Optional[ControlCheck] = None

    @property
    def ok(self) -> bool:
        parts = [p for p in (self.growth, self.gap, self.control) if p is not None]
        return bool(parts) and all(p.ok for p in parts)


def verify_growth(branch: SpectralBranch, ratio_cap: float = 100.0) -> GrowthCheck:
    """Check |lambda_n| + 1 against the declared n^alpha envelope.

    Reports the empirical sandwich constants, their ratio as a stability
    indicator, and a fitted growth order from a log-log regression on the
    upper three quarters of indices.
    """
    lam = branch.eigenvalues
    n = branch.mode_indices.astype(float)
    scaled = (np.abs(lam) + 1.0) / n ** branch.alpha
    i_low = int(np.argmin(scaled))
    i_high = int(np.argmax(scaled))
    c_low = float(scaled[i_low])
    c_high = float(scaled[i_high])
    ratio = float("inf") if c_low == 0 else c_high / c_low
    win = _fit_window(branch.N)
    alpha_hat = _loglog_slope(n[win], np.abs(lam[win]))
    ok = c_low > 0 and np.isfinite(c_high) and ratio <= ratio_cap
    return GrowthCheck(ok=bool(ok), c_low=c_low, c_high=c_high, ratio=ratio,
                       alpha_hat=alpha_hat, witness_low=i_low + 1,
                       witness_high=i_high + 1, ratio_cap=ratio_cap)


def verify_gap(branch: SpectralBranch, floor: float = 1e-6) -> GapCheck:
    """Check the separation |lambda_n - lambda_p| >= C n^(alpha-1) |n-p|.

    Returns the worst empirical constant over all ordered pairs and the
    minimizing pair (n, p).
    """
    lam = branch.eigenvalues
    N = branch.N
    if N < 2:
        return GapCheck(ok=True, constant=float("inf"), witness=(0, 0), floor=floor)
    n = branch.mode_indices.astype(float)
    diff = np.abs(lam[:, None] - lam[None, :])          # |lambda_n - lambda_p|, rows n
    denom = (n[:, None] ** (branch.alpha - 1.0)) * np.abs(n[:, None] - n[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        quot = diff / denom
    np.fill_diagonal(quot, np.inf)
    flat = int(np.argmin(quot))
    i, j = divmod(flat, N)
    constant = float(quot[i, j])
    return GapCheck(ok=bool(constant > floor), constant=constant,
                    witness=(i + 1, j + 1), floor=floor)


def verify_control(branch: SpectralBranch) -> ControlCheck:
    """Check the declared coefficient envelope c1 n^-beta <= |b_n| <= c2 n^(gamma-beta).

    Zero coefficients were already rejected at construction; this reports
    the empirical constants, the fitted decay order beta_hat, and the
    fitted slack gamma_hat of |b_n| n^beta.
    """
    b = np.abs(branch.control_coeffs)
    zero = np.nonzero(b == 0)[0]
    if zero.size:
        raise AssumptionError(f"control coefficient b_{zero[0] + 1} is zero")
    n = branch.mode_indices.astype(float)
    low = b * n ** branch.beta
    high = b * n ** (branch.beta - branch.gamma)
    i_min = int(np.argmin(low))
    i_max = int(np.argmax(high))
    win = _fit_window(branch.N)
    beta_hat = -_loglog_slope(n[win], b[win])
    gamma_hat = max(0.0, _loglog_slope(n[win], low[win])) if branch.N >= 4 else 0.0
    return ControlCheck(ok=bool(low[i_min] > 0), c1_hat=float(low[i_min]),
                        c2_hat=float(high[i_max]), beta_hat=beta_hat,
                        gamma_hat=gamma_hat, witness_min=i_min + 1,
                        witness_max=i_max + 1)


def verify_assumptions(branch: SpectralBranch, gap_floor: float = 1e-6,
                       growth_ratio_cap: float = 100.0) -> AssumptionVerdict:
    """Run all three standing-assumption checks on a branch."""
    return AssumptionVerdict(growth=verify_growth(branch, ratio_cap=growth_ratio_cap),
                             gap=verify_gap(branch, floor=gap_floor),
                             control=verify_control(branch))


# ---------------------------------------------------------------------------
# controllability classification
# ---------------------------------------------------------------------------

def admissible_r_interval(alpha: float, gamma: float, beta: float = 0.0,
                          convention: str = "symmetric") -> tuple:
    """Open interval of scale indices r on which the transform is an isomorphism.

    convention "symmetric" shrinks both ends by gamma; "left_shrunk" keeps
    the right end at alpha - 1/2.
    """
    if convention == "symmetric":
        return (beta + 0.5 - alpha + gamma, beta + alpha - 0.5 - gamma)
    if convention == "left_shrunk":
        return (beta + 0.5 - alpha + gamma, beta + alpha - 0.5)
    raise ValueError(f"unknown interval convention {convention!r}")


@dataclass(frozen=True)
class ControllabilityClassification:
    labels: frozenset
    admissibility_necessary_ok: bool
    exact_controllability_necessary_ok: bool
    ratio_slope: float
    r: float
    interval: tuple


def classify_controllability(branch: SpectralBranch, r: float,
                             slope_tol: float = 0.05) -> ControllabilityClassification:
    """Classify the regime of the control coefficients at scale index r.

    The two necessary-condition flags test whether |b_n| stays within
    (1 + |Re lambda_n|)^{1/2} envelopes: the growth trend of the ratio
    |b_n| / (1 + |Re lambda_n|)^{1/2} must be flat (within slope_tol) from
    above for admissibility and from below for exact controllability.
    Both flags are invariant under rescaling b by a nonzero scalar.
    """
    lo, hi = admissible_r_interval(branch.alpha, branch.gamma, beta=0.0)
    if not lo < r < hi:
        raise ValueError(
            f"r={r} outside the admissible open interval ({lo}, {hi}) "
            f"for alpha={branch.alpha}, gamma={branch.gamma}")
    ratio = np.abs(branch.control_coeffs) / np.sqrt(
        1.0 + np.abs(branch.eigenvalues.real))
    slope = _loglog_slope(branch.mode_indices.astype(float), ratio)
    admissible = bool(slope <= slope_tol)
    exact = bool(slope >= -slope_tol)
    if r == 0.0 and branch.gamma == 0.0:
        labels = frozenset({"classical"})
    elif r > 0.0:
        labels = frozenset({"not-necessarily-admissible"})
    else:
        labels = frozenset({"not-exactly-controllable-in-X"})
    return ControllabilityClassification(
        labels=labels, admissibility_necessary_ok=admissible,
        exact_controllability_necessary_ok=exact, ratio_slope=slope,
        r=r, interval=(lo, hi))


# ---------------------------------------------------------------------------
# branch decomposition
# ---------------------------------------------------------------------------

def branch_split(eigenvalues: Sequence[complex], multiplicities: Sequence[int],
                 m: int, alpha: float, label: str = "split",
                 truncate: bool = False) -> SpectralSystem:
    """Distribute repeated eigenvalues over m branches with simple spectrum.

    A value of multiplicity k is assigned to the last k branches, so branch
    m collects every value and branch 1 only the fully repeated ones (the
    torus Laplacian convention: sines in branch 1, cosines plus the
    constant mode in branch 2).  Control coefficients are set to 1;
    attach real ones by rebuilding branches afterwards.

    truncate=True trims every branch to the shortest branch length so the
    result has a uniform truncation level.
    """
    eigs = np.asarray(eigenvalues, dtype=complex)
    mult = [int(k) for k in multiplicities]
    if len(eigs) != len(mult):
        raise ValueError("eigenvalues and multiplicities must align")
    if m < 1:
        raise ValueError("m must be >= 1")
    buckets: list[list[complex]] = [[] for _ in range(m)]
    for lam, k in zip(eigs, mult):
        if k < 1:
            raise ValueError(f"multiplicity {k} must be positive")
        if k > m:
            raise ValueError(
                f"eigenvalue {lam} has multiplicity {k} exceeding the declared m={m}")
        for branch_i in range(m - k, m):
            buckets[branch_i].append(lam)
    if any(not bucket for bucket in buckets):
        raise ValueError("some branch received no eigenvalues; lower m")
    if truncate:
        n_min = min(len(bucket) for bucket in buckets)
        buckets = [bucket[:n_min] for bucket in buckets]
    branches = tuple(
        SpectralBranch(i + 1, np.asarray(bucket, dtype=complex),
                       np.ones(len(bucket), dtype=complex), alpha)
        for i, bucket in enumerate(buckets))
    return SpectralSystem(branches=branches, label=label)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def system_to_json(system: SpectralSystem) -> dict:
    return {
        "label": system.label,
        "m": system.m,
        "branches": [
            {
                "i": b.index,
                "alpha": float(b.alpha),
                "beta": float(b.beta),
                "gamma": float(b.gamma),
                "eigenvalues": cpairs(b.eigenvalues),
                "control_coeffs": cpairs(b.control_coeffs),
            }
            for b in system.branches
        ],
    }


def system_from_json(doc: dict) -> SpectralSystem:
    try:
        branches = tuple(
            SpectralBranch(
                index=int(bd["i"]),
                eigenvalues=from_cpairs(bd["eigenvalues"]),
                control_coeffs=from_cpairs(bd["control_coeffs"]),
                alpha=float(bd["alpha"]),
                beta=float(bd["beta"]),
                gamma=float(bd["gamma"]),
            )
            for bd in doc["branches"]
        )
        system = SpectralSystem(branches=branches, label=str(doc.get("label", "")))
    except KeyError as exc:
        raise ValueError(f"system document missing field {exc}") from exc
    if int(doc.get("m", system.m)) != system.m:
        raise ValueError("declared m does not match the number of branches")
    return system
