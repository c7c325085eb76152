"""Command-line entry point: ``multiwell <subcommand> [--config PATH] [--out DIR]``.

Exit codes: 0 success, 1 configuration error, 2 numerical or resolution
failure, 3 acceptance failure. The default output directory is read from
``MULTIWELL_OUT`` when neither ``--out`` nor the config sets one.
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config
from .diagnostics import beating_detector, compare_gpe_dnls, drift_report
from .dnls import dnls_integrate, extract_coefficients
from .errors import ConfigError, NumericalError, ResolutionError
from .gpe import GpeRunConfig, gpe_integrate
from .io import config_digest, write_csv, write_json, write_snapshots
from .normalform import NormalFormConfig, normal_form_from_spectral
from .potential import agmon_distance, barrier_maxima, validate_hypothesis1
from .spectral import SpectralData, WellBasis, eigensolve, single_well_basis, spectral_gap, splitting

ENV_OUT = "MULTIWELL_OUT"
COMMANDS = ("spectrum", "dnls-fit", "simulate-gpe", "simulate-dnls", "compare", "normal-form", "sweep", "acceptance")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 0, 1, 2, 3


@dataclass
class Context:
    config: ExperimentConfig
    spec: object
    grid: object
    spectral: SpectralData
    basis: WellBasis
    eps: float

    @property
    def n(self) -> int:
        return self.spec.n


def build_context(cfg: ExperimentConfig) -> Context:
    """Potential, grid, eigenpairs, well basis and the resolved eps."""
    spec = cfg.potential.build()
    grid = cfg.grid.build()
    ph = cfg.physics
    spectral = eigensolve(spec, grid, ph.hbar, cfg.run.K, method=cfg.run.spectral_method)
    basis = single_well_basis(spec, grid, ph.hbar, spectral=spectral)
    eps = ph.eps
    if ph.eta is not None:
        unit = extract_coefficients(spectral, basis, 1.0, ph.sigma)
        eps = ph.eta / unit.eta
    return Context(cfg, spec, grid, spectral, basis, float(eps))


def initial_amplitudes(ctx: Context) -> np.ndarray:
    """Reduced amplitudes of the configured initial state."""
    kind, _, arg = ctx.config.run.state.partition(":")
    n = ctx.n
    if kind == "dnls":
        try:
            a = np.array([complex(v) for v in arg.split(",")])
        except ValueError as exc:
            raise ConfigError(f"bad amplitude list {arg!r}") from exc
        if a.shape != (n,):
            raise ConfigError(f"state has {len(a)} amplitudes, the potential has {n} wells")
        nrm = np.linalg.norm(a)
        if nrm == 0:
            raise ConfigError("initial amplitudes vanish")
        return a / nrm
    return ctx.basis.amplitudes(ctx.grid, initial_field(ctx))


def initial_field(ctx: Context) -> np.ndarray:
    """Grid field of the configured initial state (``well:j``, ``eigen:k`` or ``dnls:...``)."""
    kind, _, arg = ctx.config.run.state.partition(":")
    if kind == "dnls":
        return (ctx.basis.frame @ initial_amplitudes(ctx)).astype(complex)
    try:
        j = int(arg)
    except ValueError as exc:
        raise ConfigError(f"bad state {ctx.config.run.state!r}") from exc
    if kind == "well" and 1 <= j <= ctx.n:
        return ctx.basis.frame[:, j - 1].astype(complex)
    if kind == "eigen" and 1 <= j <= ctx.spectral.K:
        return ctx.spectral.eigenvectors[:, j - 1].astype(complex)
    raise ConfigError(f"bad state {ctx.config.run.state!r}")


def _t_end(ctx: Context) -> float:
    run = ctx.config.run
    if run.t_end is not None:
        return run.t_end
    omega, _ = splitting(ctx.spectral, ctx.n)
    return run.beats * np.pi * ctx.config.physics.hbar / omega


def _gpe(ctx: Context):
    run, ph = ctx.config.run, ctx.config.physics
    cfg = GpeRunConfig(
        ph.hbar, ctx.eps, ph.sigma, t_end=_t_end(ctx), dt=run.dt, n=ctx.n,
        stride=run.stride, obs_stride=run.obs_stride, method=run.method, K=run.K, s=ph.s,
    )
    return gpe_integrate(ctx.spectral, cfg, initial_field(ctx), ctx.basis)


# subcommands: each returns a JSON summary and writes its files into ``out``


def cmd_spectrum(cfg: ExperimentConfig, out: Path, digest: str) -> dict:
    ctx = build_context(cfg)
    sp, n = ctx.spectral, ctx.n
    omega, Omega = splitting(sp, n)
    report = validate_hypothesis1(ctx.spec, ctx.grid)
    summary = {
        "hbar": sp.hbar,
        "eigenvalues": sp.eigenvalues[: min(sp.K, 2 * n)].tolist(),
        "omega": omega,
        "Omega": Omega,
        "gap": spectral_gap(sp, n),
        "agmon": [agmon_distance(ctx.spec, j) for j in range(1, n)],
        "barriers": barrier_maxima(ctx.spec),
        "wells": list(ctx.spec.wells),
        "hypothesis1": {"passed": report.passed, "failed": report.failed(), "clause_v_mode": report.clause_v_mode},
        "basis": {
            "a_thr": ctx.basis.a_thr,
            "lam_hat": ctx.basis.lam_hat.tolist(),
            "c_residual": ctx.basis.c_residual.tolist(),
            "overlap": ctx.basis.overlap.tolist(),
        },
    }
    rows = np.column_stack([np.arange(1, sp.K + 1), sp.eigenvalues])
    write_csv(out / "eigenvalues.csv", ["k", "lambda"], rows, digest)
    return summary


def cmd_dnls_fit(cfg: ExperimentConfig, out: Path, digest: str) -> dict:
    ctx = build_context(cfg)
    return extract_coefficients(ctx.spectral, ctx.basis, ctx.eps, cfg.physics.sigma).to_dict()


def cmd_simulate_gpe(cfg: ExperimentConfig, out: Path, digest: str) -> dict:
    ctx = build_context(cfg)
    tr = _gpe(ctx)
    pops = [f"p{j + 1}" for j in range(ctx.n)]
    write_csv(out / "gpe.csv", ["t", "N", "E", "x_mean", *pops, "picnorm"], tr.table(), digest)
    if len(tr.fields):
        write_snapshots(out / "fields.bin", ctx.grid, tr.field_times, tr.fields, digest)
    model = extract_coefficients(ctx.spectral, ctx.basis, ctx.eps, cfg.physics.sigma)
    omega = tr.meta["omega"]
    beat = beating_detector(tr.times, tr.x_mean, np.pi * cfg.physics.hbar / omega)
    return {
        "eps": ctx.eps,
        "dt": tr.dt,
        "steps": tr.meta["steps"],
        "t_end": float(tr.times[-1]),
        "max_norm_error": float(np.max(np.abs(tr.N - 1.0))),
        "energy_drift": float(np.max(np.abs(tr.E - tr.E[0]))),
        "max_tail": float(tr.tail.max()),
        "max_picnorm": float(tr.picnorm.max()),
        "beating": {k: beat[k] for k in ("status", "period", "amplitude")},
        "drift": drift_report(tr, model, cfg.physics.hbar).to_dict(),
    }


def cmd_simulate_dnls(cfg: ExperimentConfig, out: Path, digest: str) -> dict:
    ctx = build_context(cfg)
    model = extract_coefficients(ctx.spectral, ctx.basis, ctx.eps, cfg.physics.sigma)
    run = cfg.run
    tr = dnls_integrate(model, initial_amplitudes(ctx), run.tau_end, run.dtau, stride=max(run.obs_stride, 1))
    cols = ["tau"]
    for j in range(model.n):
        cols += [f"re{j + 1}", f"im{j + 1}"]
    cols += [f"p{j + 1}" for j in range(model.n)] + ["I", "K0"]
    parts = [tr.times[:, None]]
    for j in range(model.n):
        parts.append(np.column_stack([tr.states[:, j].real, tr.states[:, j].imag]))
    parts += [tr.populations, tr.I[:, None], tr.K0[:, None]]
    write_csv(out / "dnls.csv", cols, np.hstack(parts), digest)
    return {
        "model": model.to_dict(),
        "tau_end": float(tr.times[-1]),
        "I_drift": float(np.max(np.abs(tr.I - tr.I[0]))),
        "K0_drift": float(np.max(np.abs(tr.K0 - tr.K0[0]))),
        "max_newton": int(tr.max_newton),
        "min_p1": float(tr.populations[:, 0].min()),
    }


def cmd_compare(cfg: ExperimentConfig, out: Path, digest: str) -> dict:
    ctx = build_context(cfg)
    g = _gpe(ctx)
    model = extract_coefficients(ctx.spectral, ctx.basis, ctx.eps, cfg.physics.sigma)
    hbar = cfg.physics.hbar
    tau_end = model.omega * g.times[-1] / hbar
    dtau = min(cfg.run.dtau, model.omega * g.dt / hbar * cfg.run.obs_stride)
    d = dnls_integrate(model, ctx.basis.amplitudes(ctx.grid, initial_field(ctx)), tau_end, dtau)
    rep = compare_gpe_dnls(g, d, model, hbar)
    cols = ["t", "tau"] + [f"gpe_p{j + 1}" for j in range(ctx.n)] + [f"dnls_p{j + 1}" for j in range(ctx.n)]
    write_csv(out / "compare.csv", cols, rep.table(), digest)
    return {**rep.to_dict(), "eta": model.eta, "eps": ctx.eps}


def cmd_normal_form(cfg: ExperimentConfig, out: Path, digest: str) -> dict:
    ctx = build_context(cfg)
    nf = cfg.normal_form
    if nf.M > ctx.spectral.K:
        raise ConfigError(f"normal form needs M = {nf.M} modes, only {ctx.spectral.K} computed")
    nfc = NormalFormConfig(
        sigma=cfg.physics.sigma, max_degree=nf.max_degree, r_max=nf.r_max, exact=nf.exact, mu_star=nf.mu_star
    )
    res = normal_form_from_spectral(ctx.spectral, ctx.n, nf.M, ctx.eps, nfc)
    rep = res.exactness_report()
    write_json(out / "normal_form_polys.json", res.to_dict(), digest)
    return {
        "M": nf.M,
        "r": res.r,
        "eps": ctx.eps,
        "constants": res.constants,
        "truncated": res.truncated,
        "exactness": {**rep, "coupling_terms": {str(k): v for k, v in rep["coupling_terms"].items()}},
    }


def cmd_acceptance(cfg: ExperimentConfig, out: Path, digest: str, criteria=None, echo=print) -> dict:
    from .acceptance import run_all

    results = run_all(criteria, seed=cfg.seed, echo=echo)
    return {"passed": all(r.passed for r in results), "criteria": [r.to_dict() for r in results]}


RUNNERS = {
    "spectrum": cmd_spectrum,
    "dnls-fit": cmd_dnls_fit,
    "simulate-gpe": cmd_simulate_gpe,
    "simulate-dnls": cmd_simulate_dnls,
    "compare": cmd_compare,
    "normal-form": cmd_normal_form,
}


def _single(command: str, cfg: ExperimentConfig, out: Path) -> dict:
    digest = config_digest({"command": command, **cfg.to_dict()})
    out.mkdir(parents=True, exist_ok=True)
    summary = RUNNERS[command](cfg, out, digest)
    write_json(out / "summary.json", {"command": command, "config": cfg.to_dict(), "result": summary}, digest)
    return {"digest": digest, "result": summary}


def _sweep_job(args):
    command, data, out = args
    from .config import from_dict

    cfg = from_dict(data)
    try:
        return {"status": "ok", **_single(command, cfg, Path(out))}
    except (NumericalError, ResolutionError) as exc:
        return {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}


def sweep_points(cfg: ExperimentConfig) -> list:
    """Cartesian product of the sweep lists, in sorted-key order."""
    if not cfg.sweep:
        raise ConfigError("sweep block is empty")
    keys = sorted(cfg.sweep)
    points = []
    for values in itertools.product(*(cfg.sweep[k] for k in keys)):
        run = cfg
        for k, v in zip(keys, values):
            run = run.replace(k, v)
        points.append((dict(zip(keys, values)), run))
    return points


def cmd_sweep(cfg: ExperimentConfig, out: Path, task: str, threads: int = 1) -> dict:
    """Per-run outputs in ``run_XXX/`` and an index of all runs.

    Numerical failures of single runs are recorded in the index rather
    than aborting the sweep.
    """
    if task not in RUNNERS:
        raise ConfigError(f"sweep task must be one of {sorted(RUNNERS)}, got {task!r}")
    points = sweep_points(cfg)
    jobs = []
    for i, (_, run) in enumerate(points):
        run = run.replace("sweep", {})
        jobs.append((task, run.to_dict(), str(out / f"run_{i:03d}")))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(j) for j in jobs]
    runs = []
    for i, ((params, _), res) in enumerate(zip(points, results)):
        runs.append({"index": i, "params": params, "dir": f"run_{i:03d}", **res})
    return {"task": task, "count": len(runs), "failed": sum(r["status"] != "ok" for r in runs), "runs": runs}


def output_dir(args, cfg: ExperimentConfig) -> Path:
    if args.out:
        return Path(args.out)
    if cfg.output:
        return Path(cfg.output)
    return Path(os.environ.get(ENV_OUT, "multiwell-out"))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="multiwell", description="Multiwell field and reduced-model experiments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON experiment config (defaults when omitted)")
    p.add_argument("--out", help=f"output directory (default: config 'output', then ${ENV_OUT}, then ./multiwell-out)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--task", default="spectrum", help="subcommand run at each sweep point")
    p.add_argument("--criteria", help="comma-separated subset for 'acceptance', e.g. 1,3,9")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.replace("seed", args.seed)
        out = output_dir(args, cfg)
        if args.command == "acceptance":
            which = None
            if args.criteria:
                try:
                    which = [int(v) for v in args.criteria.split(",")]
                except ValueError as exc:
                    raise ConfigError(f"bad criteria list {args.criteria!r}") from exc
                if not set(which) <= set(range(1, 13)):
                    raise ConfigError("criteria are numbered 1..12")
            digest = config_digest({"command": "acceptance", "criteria": which, **cfg.to_dict()})
            res = cmd_acceptance(cfg, out, digest, which)
            write_json(out / "acceptance.json", res, digest)
            return EXIT_OK if res["passed"] else EXIT_ACCEPTANCE
        if args.command == "sweep":
            digest = config_digest({"command": "sweep", "task": args.task, **cfg.to_dict()})
            out.mkdir(parents=True, exist_ok=True)
            index = cmd_sweep(cfg, out, args.task, args.threads)
            write_json(out / "index.json", index, digest)
            print(f"sweep: {index['count']} runs, {index['failed']} failed -> {out / 'index.json'}")
            return EXIT_NUMERICAL if index["failed"] else EXIT_OK
        res = _single(args.command, cfg, out)
        print(f"{args.command}: wrote {out / 'summary.json'} (digest {res['digest'][:12]})")
        return EXIT_OK
    except ConfigError as exc:
        print(f"multiwell {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ResolutionError) as exc:
        print(f"multiwell {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
