"""Command-line pipeline: synthesize -> verify -> simulate -> sweep -> report.

One JSON config document drives everything; unknown keys are rejected up
front so a typo cannot silently change a run.  Artifacts land in
out/{system.json, law.json, transform.json, report.json, traces/, plots/}
and are byte-identical across runs of the same config and version.

Exit codes: 0 success, 2 assumption-verdict failure, 3 solver failure,
4 integrator guard violation, 1 anything else.  Failures print a
machine-readable JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import diagnostics, models, simulate, synthesis, transform
from .errors import (AssumptionError, ConfigError, FredstabError,
                     SolverError)
from .jsonio import canonical_json, read_json, write_json
from .spectral_core import (SpectralSystem, classify_controllability,
                            system_from_json, system_to_json,
                            verify_assumptions)
from .synthesis import law_from_json, law_to_json
from .transform import transform_from_json, transform_to_json

TB_GATE = 1e-8
OPEQ_GATE = 1e-8
VERIFY_TOL = 1e-6

_SCENARIO_KEYS = {"name", "u0", "t_end", "samples", "dt", "integrator", "nonlinear"}
_CONFIG_KEYS = {"model", "lambda0", "delta", "N", "method", "r_list",
                "scenarios", "sweep", "output_dir"}
_MODEL_KEYS = {"kind", "N", "params", "path"}
_SWEEP_KEYS = {"lambda0", "N", "gamma"}
_U0_KEYS = {"kind", "branch", "n", "amplitude", "seed", "scale", "l2", "mode"}


def _reject_unknown(doc: dict, allowed: set, where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


@dataclass(frozen=True)
class RunConfig:
    model: dict
    lambda0: float
    delta: float
    N: int
    method: str
    r_list: tuple
    scenarios: tuple
    sweep: Optional[dict]
    output_dir: str
    raw: dict = field(default_factory=dict)


def load_config(path) -> RunConfig:
    doc = read_json(path)
    return parse_config(doc)


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    _reject_unknown(doc, _CONFIG_KEYS, "config")
    model = doc.get("model")
    if not isinstance(model, dict):
        raise ConfigError("config.model must be an object (descriptor or {path})")
    _reject_unknown(model, _MODEL_KEYS, "config.model")
    method = doc.get("method", "direct")
    if method not in ("direct", "iterative", "both"):
        raise ConfigError(f"config.method must be direct|iterative|both, got {method!r}")
    scenarios = []
    for i, sc in enumerate(doc.get("scenarios", [])):
        _reject_unknown(sc, _SCENARIO_KEYS, f"config.scenarios[{i}]")
        if "u0" in sc:
            _reject_unknown(sc["u0"], _U0_KEYS, f"config.scenarios[{i}].u0")
        scenarios.append(dict(sc))
    sweep = doc.get("sweep")
    if sweep is not None:
        _reject_unknown(sweep, _SWEEP_KEYS, "config.sweep")
    N = int(doc.get("N", model.get("N", 0)))
    if N < 1 and "path" not in model:
        raise ConfigError("config.N (or model.N) must be a positive integer")
    return RunConfig(
        model=model,
        lambda0=float(doc.get("lambda0", 2.0)),
        delta=float(doc.get("delta", 0.25)),
        N=N,
        method=method,
        r_list=tuple(float(r) for r in doc.get("r_list", [0.0])),
        scenarios=tuple(scenarios),
        sweep=dict(sweep) if sweep else None,
        output_dir=str(doc.get("output_dir", "out")),
        raw=dict(doc),
    )


def _build_system(cfg: RunConfig, N: Optional[int] = None,
                  gamma: Optional[float] = None) -> SpectralSystem:
    model = dict(cfg.model)
    if "path" in model:
        return system_from_json(read_json(model["path"]))
    params = dict(model.get("params", {}))
    if gamma is not None:
        params["gamma"] = gamma
    desc = models.ModelDescriptor(kind=model["kind"],
                                  N=int(N if N is not None else cfg.N),
                                  params=params)
    return models.model_from_descriptor(desc)


def _out_dir(cfg: RunConfig, override: Optional[str]) -> str:
    out = override or os.environ.get("OUTPUT_DIR") or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    return out


def _synthesize_pipeline(cfg: RunConfig, system: SpectralSystem,
                         lambda0: Optional[float] = None):
    """Shared synthesis path: verdicts -> shift -> gains -> transforms."""
    verdicts = [verify_assumptions(b) for b in system.branches]
    bad = [i + 1 for i, v in enumerate(verdicts) if not v.ok]
    if bad:
        raise AssumptionError(
            f"standing assumptions failed on branch(es) {bad}; "
            "see the verdict details in the report")
    shift = synthesis.select_shift(system, lambda0 or cfg.lambda0, cfg.delta)
    method = "direct" if cfg.method == "both" else cfg.method
    law = synthesis.synthesize_feedback(system, shift, method=method)
    if cfg.method == "both":
        other = synthesis.synthesize_feedback(system, shift, method="iterative")
        for bg, bo in zip(law.branches, other.branches):
            gap = float(np.max(np.abs(bg.products - bo.products)))
            if gap > 1e-8:
                raise SolverError(
                    f"direct and iterative gains disagree by {gap:.3e} on "
                    f"branch {bg.branch_index}")
    tr = transform.build_system_transform(system, law)
    return verdicts, shift, law, tr


def cmd_synthesize(cfg: RunConfig, out: Optional[str] = None) -> int:
    out = _out_dir(cfg, out)
    system = _build_system(cfg)
    verdicts, shift, law, tr = _synthesize_pipeline(cfg, system)
    write_json(os.path.join(out, "system.json"), system_to_json(system))
    write_json(os.path.join(out, "law.json"), law_to_json(law))
    write_json(os.path.join(out, "transform.json"), transform_to_json(tr))
    worst_tb = max(bt.tb_residual for bt in tr.branches)
    worst_opeq = max(bt.opeq_residual for bt in tr.branches)
    if worst_tb > TB_GATE or worst_opeq > OPEQ_GATE:
        raise SolverError(
            f"residual gates failed: tb={worst_tb:.3e} (gate {TB_GATE:.0e}), "
            f"opeq={worst_opeq:.3e} (gate {OPEQ_GATE:.0e})")
    print(f"synthesized {system.label}: lambda={shift.lam:g} "
          f"tb={worst_tb:.3e} opeq={worst_opeq:.3e} -> {out}")
    return 0


def _load_artifacts(out: str):
    for name in ("system.json", "law.json", "transform.json"):
        if not os.path.exists(os.path.join(out, name)):
            raise ConfigError(f"missing artifact {name} in {out}")
    system = system_from_json(read_json(os.path.join(out, "system.json")))
    law = law_from_json(read_json(os.path.join(out, "law.json")))
    tr = transform_from_json(read_json(os.path.join(out, "transform.json")))
    return system, law, tr


def cmd_verify(cfg: RunConfig, out: Optional[str] = None) -> int:
    """Recompute every residual from the stored system and law.

    Stored residuals are never trusted; any disagreement beyond 1e-6
    between a stored number and its recomputation flags tampering or
    version drift.
    """
    out = _out_dir(cfg, out)
    system, law, tr = _load_artifacts(out)
    drift = []
    for b in system.branches:
        bg = law.branch(b.index)
        recomputed = -bg.products / b.control_coeffs
        if np.max(np.abs(recomputed - bg.gains)) > VERIFY_TOL * max(1.0, np.max(np.abs(bg.gains))):
            drift.append(f"branch {b.index}: gains inconsistent with products")
        rebuilt = transform.build_transform(b, bg)
        stored = tr.branch(b.index)
        if np.max(np.abs(rebuilt.matrix - stored.matrix)) > VERIFY_TOL:
            drift.append(f"branch {b.index}: transform matrix drift")
        if abs(rebuilt.tb_residual - stored.tb_residual) > VERIFY_TOL:
            drift.append(f"branch {b.index}: tb_residual drift")
        if abs(rebuilt.opeq_residual - stored.opeq_residual) > VERIFY_TOL:
            drift.append(f"branch {b.index}: opeq_residual drift")
    if drift:
        raise ConfigError("verification failed: " + "; ".join(drift))
    report = _assemble_report(cfg, system, law, tr)
    diagnostics.write_report(report, os.path.join(out, "report.json"))
    print(f"verified artifacts in {out}: tb={report.tb_residual:.3e} "
          f"opeq={report.opeq_residual:.3e} match={report.spectrum_match:.3e}")
    return 0


def _assemble_report(cfg: RunConfig, system, law, tr, decay_fits=None):
    closed = [transform.closed_loop_matrix(b, law.branch(b.index))
              for b in system.branches]
    conditioning = {}
    b0 = system.branches[0]
    lo, hi = transform.admissible_r_interval(b0.alpha, b0.gamma, beta=b0.beta)
    for r in cfg.r_list:
        if lo < r < hi:
            conditioning.update(transform.conditioning_profile(
                tr.branch(b0.index).matrix, [r], b0.alpha, b0.gamma, beta=b0.beta))
    _, tail_max = synthesis.inverse_gap_sum_profile(b0, law.lam, 0.0)
    _, S_c = synthesis.resolvent_matrix(b0, law.lam)
    eps_hi = min((b0.alpha - 1.0) / 2.0, b0.alpha - 0.5)
    compact = {"eps": eps_hi / 2.0,
               "norm": diagnostics.compactness_proxy(S_c, 0.0, eps_hi / 2.0, b0.alpha)}
    classification = None
    try:
        classification = classify_controllability(b0, 0.0)
    except ValueError:
        pass
    return diagnostics.make_report(
        system=system, shift=law.lam, law=law, transforms=tr, closed_loops=closed,
        conditioning=conditioning, gap_sum_tail_max=tail_max, compactness=compact,
        decay_fits=decay_fits, classification=classification, config=cfg.raw)


def _linear_u0(system: SpectralSystem, spec: dict):
    kind = spec.get("kind", "random")
    if kind == "basis":
        blocks = [np.zeros(b.N, dtype=complex) for b in system.branches]
        i = int(spec.get("branch", 1)) - 1
        n = int(spec.get("n", 1)) - 1
        blocks[i][n] = complex(spec.get("amplitude", 1.0))
        return blocks
    if kind == "random":
        return simulate.random_state(system, seed=int(spec.get("seed", 0)),
                                     scale=float(spec.get("scale", 1.0)))
    raise ConfigError(f"unknown linear u0 kind {kind!r}")


def _burgers_u0(system: SpectralSystem, spec: dict) -> np.ndarray:
    N = system.branches[0].N
    kind = spec.get("kind", "burgers_random")
    c = np.zeros(2 * N + 1, dtype=complex)
    if kind == "burgers_sine":
        A = float(spec.get("amplitude", 1e-3))
        mode = int(spec.get("mode", 1))
        c[N + mode] = -0.5j * A
        c[N - mode] = 0.5j * A
        return c
    if kind == "burgers_random":
        rng = np.random.default_rng(int(spec.get("seed", 0)))
        k = np.arange(1, N + 1, dtype=float)
        amp = rng.standard_normal(N) / (1.0 + k ** 2)
        phase = rng.uniform(0, 2 * np.pi, N)
        c[N] = 0.3 * abs(rng.standard_normal())
        c[N + 1:] = 0.5 * amp * np.exp(1j * phase)
        c[:N] = np.conj(c[N + 1:])[::-1]
        norm = np.sqrt(2 * np.pi * np.sum(np.abs(c) ** 2))
        target = float(spec.get("l2", 1e-3))
        if norm == 0:
            raise ConfigError("degenerate random initial state")
        return c * (target / norm)
    raise ConfigError(f"unknown semilinear u0 kind {kind!r}")


def cmd_simulate(cfg: RunConfig, out: Optional[str] = None) -> int:
    out = _out_dir(cfg, out)
    system, law, tr = _load_artifacts(out)
    traces_dir = os.path.join(out, "traces")
    os.makedirs(traces_dir, exist_ok=True)
    fits = {}
    for sc in cfg.scenarios:
        name = sc.get("name", "scenario")
        t_end = float(sc.get("t_end", 1.0))
        samples = int(sc.get("samples", 64))
        dt = float(sc.get("dt", 1e-4))
        times = np.linspace(0.0, t_end, samples + 1)
        if sc.get("nonlinear", False):
            if not system.label.startswith("heat_torus"):
                raise ConfigError("nonlinear scenarios need the heat_torus model")
            u0 = _burgers_u0(system, sc.get("u0", {}))
            trace = simulate.simulate_burgers(system, law, u0, times, dt=dt,
                                              r_list=cfg.r_list)
        else:
            integrator = sc.get("integrator", "semigroup_exact")
            u0 = _linear_u0(system, sc.get("u0", {}))
            trace = simulate.simulate_closed_loop(system, law, u0, times,
                                                  integrator=integrator, dt=dt,
                                                  r_list=cfg.r_list)
        simulate.trace_to_csv(trace,
                              os.path.join(traces_dir, f"{name}_modes.csv"),
                              os.path.join(traces_dir, f"{name}_norms.csv"))
        try:
            fit = simulate.fit_decay(trace, r=cfg.r_list[0])
            fits[name] = fit
        except ValueError:
            fits[name] = None
    report = _assemble_report(cfg, system, law, tr, decay_fits=fits)
    diagnostics.write_report(report, os.path.join(out, "report.json"))
    for name, fit in fits.items():
        msg = "no fit" if fit is None else f"mu_hat={fit.mu_hat:.4f} r2={fit.r2:.4f}"
        print(f"scenario {name}: {msg}")
    return 0


def cmd_sweep(cfg: RunConfig, out: Optional[str] = None,
              jobs: Optional[int] = None) -> int:
    out = _out_dir(cfg, out)
    if not cfg.sweep:
        raise ConfigError("config.sweep is empty")
    lambdas = list(cfg.sweep.get("lambda0", [cfg.lambda0]))
    n_values = [int(v) for v in cfg.sweep.get("N", [cfg.N])]
    gammas = list(cfg.sweep.get("gamma", [None]))
    grid = [(l0, n, g) for l0 in lambdas for n in n_values for g in gammas]
    if not grid:
        raise ConfigError("sweep grid is empty")

    def run_point(point):
        l0, n, g = point
        row = {"lambda0": l0, "N": n, "gamma": "" if g is None else g}
        try:
            system = _build_system(cfg, N=n, gamma=g)
            _, shift, law, tr = _synthesize_pipeline(cfg, system, lambda0=l0)
            closed = [transform.closed_loop_matrix(b, law.branch(b.index))
                      for b in system.branches]
            match = max(diagnostics.spectrum_match_error(
                cl.spectrum, b.eigenvalues, law.lam)
                for cl, b in zip(closed, system.branches))
            u0 = simulate.random_state(system, seed=0)
            times = np.linspace(0.0, 1.0, 65)
            trace = simulate.simulate_closed_loop(system, law, u0, times)
            fit = simulate.fit_decay(trace)
            kappas = transform.conditioning_profile(
                tr.branch(1).matrix, [0.0],
                system.branches[0].alpha, system.branches[0].gamma)
            row.update({
                "lambda": shift.lam,
                "tb_residual": max(bt.tb_residual for bt in tr.branches),
                "opeq_residual": max(bt.opeq_residual for bt in tr.branches),
                "spectrum_match": match,
                "sup_product": max(bg.sup_product for bg in law.branches),
                "kappa_0": kappas[0.0],
                "mu_hat": fit.mu_hat,
                "error": "",
            })
        except FredstabError as exc:
            row.update({"lambda": "", "tb_residual": "", "opeq_residual": "",
                        "spectrum_match": "", "sup_product": "", "kappa_0": "",
                        "mu_hat": "", "error": f"{type(exc).__name__}: {exc}"})
        return row

    workers = jobs or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(run_point, grid))
    fieldnames = ["lambda0", "N", "gamma", "lambda", "tb_residual",
                  "opeq_residual", "spectrum_match", "sup_product", "kappa_0",
                  "mu_hat", "error"]
    path = os.path.join(out, "sweep.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    failures = sum(1 for r in rows if r["error"])
    print(f"sweep: {len(rows)} points, {failures} failed -> {path}")
    return 0


def cmd_report(cfg: RunConfig, out: Optional[str] = None) -> int:
    out = _out_dir(cfg, out)
    system, law, tr = _load_artifacts(out)
    report = _assemble_report(cfg, system, law, tr)
    diagnostics.write_report(report, os.path.join(out, "report.json"))
    plots = os.path.join(out, "plots")
    os.makedirs(plots, exist_ok=True)
    for b in system.branches:
        bg = law.branch(b.index)
        n = np.arange(1, bg.N + 1)
        diagnostics.svg_line_plot(
            os.path.join(plots, f"gains_branch{b.index}.svg"),
            {"|x_n|": (n, np.abs(bg.products)),
             "|x_n - lambda|": (n, np.abs(bg.corrections))},
            f"gain profile, branch {b.index}", "n", "magnitude", logy=True)
        cl = transform.closed_loop_matrix(b, bg)
        order = np.argsort(cl.spectrum.real)
        target = np.sort((b.eigenvalues - law.lam).real)
        diagnostics.svg_line_plot(
            os.path.join(plots, f"spectrum_branch{b.index}.svg"),
            {"closed-loop Re": (n, cl.spectrum.real[order]),
             "shifted target Re": (n, target)},
            f"spectrum shift, branch {b.index}", "mode (sorted)", "Re")
    if report.conditioning:
        rs = sorted(report.conditioning)
        diagnostics.svg_line_plot(
            os.path.join(plots, "conditioning.svg"),
            {"kappa_r": (np.array(rs), np.array([report.conditioning[r] for r in rs]))},
            "weighted conditioning", "r", "kappa")
    b0 = system.branches[0]
    lo, hi = transform.admissible_r_interval(b0.alpha, b0.gamma, beta=b0.beta)
    if lo < 0.0 < hi and b0.N >= 8:
        plateau = transform.conditioning_vs_truncation(b0, law.lam, 0.0)
        levels = sorted(plateau)
        diagnostics.svg_line_plot(
            os.path.join(plots, "conditioning_vs_N.svg"),
            {"kappa_0": (np.array(levels, dtype=float),
                         np.array([plateau[n] for n in levels]))},
            "conditioning plateau", "truncation N", "kappa")
    traces_dir = os.path.join(out, "traces")
    if os.path.isdir(traces_dir):
        for fname in sorted(os.listdir(traces_dir)):
            if fname.endswith("_norms.csv"):
                with open(os.path.join(traces_dir, fname), newline="") as fh:
                    rows = list(csv.reader(fh))
                if len(rows) > 2:
                    t = np.array([float(r[0]) for r in rows[1:]])
                    y = np.array([float(r[1]) for r in rows[1:]])
                    diagnostics.svg_line_plot(
                        os.path.join(plots, fname.replace("_norms.csv", "_decay.svg")),
                        {rows[0][1]: (t, y)},
                        f"decay: {fname.replace('_norms.csv', '')}",
                        "t", "norm", logy=True)
    print(f"report written to {os.path.join(out, 'report.json')}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fredstab",
        description="spectral feedback synthesis, certification, and simulation")
    parser.add_argument("command",
                        choices=["synthesize", "verify", "simulate", "sweep", "report"])
    parser.add_argument("--config", required=True, help="path to the JSON config")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--jobs", type=int, default=None,
                        help="parallel workers for sweep (default: logical cores)")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "synthesize":
            return cmd_synthesize(cfg, args.out)
        if args.command == "verify":
            return cmd_verify(cfg, args.out)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.out, jobs=args.jobs)
        return cmd_report(cfg, args.out)
    except FredstabError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        print(canonical_json(payload), file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError, KeyError, IndexError, TypeError) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        print(canonical_json(payload), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
