"""Command-line interface: simulate, fit, forecast, evaluate, sweep.

Exit codes: 0 success, 2 usage or validation error, 3 fit finished but did
not converge (some R-hat above 1.1; artifacts are still written).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import platform
import sys
from pathlib import Path

import numpy as np

from bdarch.compositional import CompositionalSeries

log = logging.getLogger("bdarch")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONVERGED = 3
RHAT_LIMIT = 1.1
RENORM_TOL = 1e-6
OUTPUT_ENV = "BDARCH_OUTPUT_DIR"


class UsageError(Exception):
    """Bad arguments, configuration or input data (exit code 2)."""


# --------------------------------------------------------------------------
# data I/O

def _parse_time(s):
    try:
        return int(s)
    except ValueError:
        return s


def _parse_share(s, lineno, col):
    try:
        v = float(s)
    except ValueError:
        raise UsageError(f"line {lineno}: column {col!r} is not a number: {s!r}") from None
    if not np.isfinite(v) or v <= 0:
        raise UsageError(f"line {lineno}: share in column {col!r} must be positive, got {s}")
    return v


def _finish_rows(times, rows, names, linenos):
    values = np.array(rows, dtype=float)
    sums = values.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > RENORM_TOL)
    if bad.size:
        k = bad[0]
        raise UsageError(f"line {linenos[k]}: shares sum to {sums[k]:.8g}, not 1 within {RENORM_TOL:g}")
    try:
        return CompositionalSeries(values / sums[:, None], times, names)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def read_series(path, fmt: str = "wide") -> CompositionalSeries:
    """Read shares from CSV.

    ``wide``: first column time label, one column per component.
    ``long``: columns time, component, value.
    Rows must sum to one within 1e-6 and are then renormalized exactly.
    """
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"data file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise UsageError(f"{path} is empty") from None
        body = [(i + 2, r) for i, r in enumerate(reader) if r]
    if fmt == "wide":
        names = [h.strip() for h in header[1:]]
        if len(names) < 2:
            raise UsageError("need a time column and at least two component columns")
        times, rows, linenos = [], [], []
        for lineno, r in body:
            if len(r) != len(header):
                raise UsageError(f"line {lineno}: expected {len(header)} fields, got {len(r)}")
            times.append(_parse_time(r[0].strip()))
            rows.append([_parse_share(v, lineno, c) for v, c in zip(r[1:], names)])
            linenos.append(lineno)
        return _finish_rows(times, rows, names, linenos)
    if fmt == "long":
        cols = [h.strip() for h in header]
        try:
            it, ic, iv = cols.index("time"), cols.index("component"), cols.index("value")
        except ValueError:
            raise UsageError("long format needs columns time, component, value") from None
        table, names, first_line = {}, [], {}
        for lineno, r in body:
            t, c = _parse_time(r[it].strip()), r[ic].strip()
            if c not in names:
                names.append(c)
            table.setdefault(t, {})[c] = _parse_share(r[iv], lineno, c)
            first_line.setdefault(t, lineno)
        times = list(table)
        for t in times:
            missing = [c for c in names if c not in table[t]]
            if missing:
                raise UsageError(f"line {first_line[t]}: time {t} lacks component {missing[0]!r}")
        return _finish_rows(times, [[table[t][c] for c in names] for t in times], names,
                            [first_line[t] for t in times])
    raise UsageError(f"unknown data format {fmt!r}")


def write_series(path, series: CompositionalSeries) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["time"] + list(series.names))
        for t, row in zip(series.time_index, series.values):
            w.writerow([t] + [repr(float(v)) for v in row])


def _write_dicts(path, rows, columns=None):
    columns = columns or (list(rows[0]) if rows else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else (repr(r[k]) if isinstance(r[k], float) else r[k]))
                        for k in columns})


def _read_dicts(path):
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# --------------------------------------------------------------------------
# configuration

def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return cfg


def _resolve_seed(seed):
    return int(seed) if seed is not None else int(np.random.SeedSequence().entropy % (2**63))


def _output_dir(arg, cfg, default="bdarch_out") -> Path:
    out = Path(arg or cfg.get("output_dir") or os.environ.get(OUTPUT_ENV) or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _versions() -> dict:
    import numba
    import scipy

    from bdarch import __version__
    from bdarch._jit import USE_NUMBA

    return {"bdarch": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__, "numba_enabled": USE_NUMBA}


def _write_manifest(out: Path, command: str, seed, config: dict, files: list[str]) -> None:
    manifest = {"command": command, "seed": seed, "config": config, "versions": _versions(), "files": files}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str), encoding="utf-8")


def build_model_spec(model_cfg: dict, names: list[str]):
    """ModelSpec from the ``model`` config block; ``ref_component`` names the alr reference."""
    from bdarch.model import ModelSpec

    mc = dict(model_cfg)
    ref_name = mc.pop("ref_component", None)
    if ref_name is not None:
        if ref_name not in names:
            raise UsageError(f"reference component {ref_name!r} not among {names}")
        mc["ref"] = names.index(ref_name)
    mc.setdefault("variant", "BDARMA_DARCH")
    mc["J"] = len(names)
    try:
        return ModelSpec.from_dict(mc)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid model configuration: {exc}") from None


def _sampler_config(cfg_block: dict, args, seed):
    from bdarch.inference import SamplerConfig

    kw = dict(cfg_block)
    for flag, key in (("chains", "n_chains"), ("warmup", "n_warmup"), ("draws", "n_keep"),
                      ("target_accept", "target_accept"), ("max_depth", "max_tree_depth")):
        v = getattr(args, flag, None)
        if v is not None:
            kw[key] = v
    kw["base_seed"] = seed
    try:
        return SamplerConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid sampler configuration: {exc}") from None


# --------------------------------------------------------------------------
# sweep selection (pure)

def select_cell(cells, criterion: str = "fmae") -> dict:
    """Argmin of ``criterion``; ties go to smaller P+Q, then smaller K_year."""
    cells = list(cells)
    if not cells:
        raise UsageError("empty sweep grid")
    return min(cells, key=lambda c: (float(c[criterion]), int(c["P"]) + int(c["Q"]), int(c["K_year"])))


def select_stage1(cells, criterion: str = "fmae") -> dict:
    """Best seasonal order among stage-1 cells (all at the base ARMA order)."""
    return select_cell(cells, criterion)


def select_stage2(cells, stage1_winner: dict | None = None, criterion: str = "fmae") -> dict:
    """Best (P, Q) at the stage-1 K_year; the stage-1 winner stays a candidate."""
    pool = list(cells)
    if stage1_winner is not None:
        k = int(stage1_winner["K_year"])
        pool = [c for c in pool if int(c["K_year"]) == k]
        if not any(int(c["P"]) == int(stage1_winner["P"]) and int(c["Q"]) == int(stage1_winner["Q"]) for c in pool):
            pool.append(stage1_winner)
    return select_cell(pool, criterion)


def sweep_from_cells(cells, criterion: str = "fmae") -> dict:
    """Two-stage selection over precomputed cells (``stage`` column 1 or 2)."""
    s1 = [c for c in cells if int(c.get("stage", 1)) == 1]
    s2 = [c for c in cells if int(c.get("stage", 1)) == 2]
    w1 = select_stage1(s1, criterion)
    w2 = select_stage2(s2, w1, criterion) if s2 else w1
    return {"stage1": w1, "stage2": w2}


# --------------------------------------------------------------------------
# commands

def cmd_simulate(args) -> int:
    from bdarch.simulation import STUDY_FAMILY, StudyConfig, run_study

    if args.study not in STUDY_FAMILY:
        raise UsageError(f"--study must be one of 1..6, got {args.study}")
    cfg_file = load_config(args.config)
    seed = _resolve_seed(args.seed if args.seed is not None else cfg_file.get("seed"))
    scfg = StudyConfig(args.study, n_replicates=args.replicates, T=args.T, train_len=args.train_len, seed=seed)
    sampler = _sampler_config(cfg_file.get("sampler", {}), args, seed)
    out = _output_dir(args.out, cfg_file)
    res = run_study(scfg, sampler, progress=lambda r, o: log.info("replicate %d %s", r, "done" if o else "failed"))
    rows = res.replicate_rows()
    cols = ["study", "replicate", "model", "frmse", "fmae", "coverage95", "max_rhat", "n_divergent"]
    _write_dicts(out / "metrics.csv", rows, cols)
    _write_dicts(out / "pacf.csv", res.pacf_rows(), ["model", "lag", "mean_pacf"])
    means = res.mean_frmse()
    for name, v in means.items():
        print(f"{name:10s} mean FRMSE x100 = {100 * v:.2f}")
    _write_manifest(out, "simulate", seed,
                    {"study": vars(scfg), "sampler": vars(sampler), "failures": res.failures},
                    ["metrics.csv", "pacf.csv"])
    return EXIT_OK


def _fit(series, spec, priors, sampler):
    from bdarch.inference import sample_posterior
    from bdarch.model import Posterior

    return sample_posterior(Posterior(spec, priors, series), sampler)


def cmd_fit(args) -> int:
    from bdarch.model import Priors

    cfg = load_config(args.config)
    data_path = args.data or cfg.get("data", {}).get("path")
    if not data_path:
        raise UsageError("--data is required")
    fmt = args.format or cfg.get("data", {}).get("format", "wide")
    series = read_series(data_path, fmt)
    train_end = args.train_end or cfg.get("split", {}).get("train_end")
    if train_end:
        if not 0 < train_end <= series.T:
            raise UsageError(f"--train-end must lie in 1..{series.T}")
        series = series[:train_end]
    model_cfg = dict(cfg.get("model", {}))
    for flag in ("variant", "P", "Q", "L", "K"):
        v = getattr(args, flag)
        if v is not None:
            model_cfg[flag] = v
    if args.ref_component is not None:
        model_cfg["ref_component"] = args.ref_component
        model_cfg.pop("ref", None)
    spec = build_model_spec(model_cfg, series.names)
    try:
        priors = Priors.from_dict(args.priors if args.priors is not None else cfg.get("priors", "simulation"))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid priors: {exc}") from None
    seed = _resolve_seed(args.seed if args.seed is not None else cfg.get("seed"))
    sampler = _sampler_config(cfg.get("sampler", {}), args, seed)
    out = _output_dir(args.out, cfg)
    try:
        draws = _fit(series, spec, priors, sampler)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    with open(out / "draws.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["chain"] + draws.names)
        for c, row in zip(draws.chain_id, draws.draws):
            w.writerow([int(c)] + [repr(float(v)) for v in row])
    diag = draws.diagnostics.summary(draws.names)
    converged = diag["max_rhat"] <= RHAT_LIMIT
    summary = {
        "converged": converged, "model": spec.to_dict(), "component_names": series.names,
        # the first max(P, Q, L, K) observations are conditioned on, not modelled
        "conditioning_window": spec.m,
        "ref_component": series.names[spec.ref], "priors": priors.to_dict(), "sampler": vars(sampler),
        "data": {"path": str(data_path), "format": fmt, "train_end": series.T,
                 "last_time": series.time_index[-1]},
        "diagnostics": diag, "step_size": draws.step_size.tolist(), "accept_rate": draws.accept_rate.tolist(),
    }
    (out / "fit_summary.json").write_text(json.dumps(summary, indent=2, default=str), encoding="utf-8")
    _write_manifest(out, "fit", seed, {"args": vars(args), "config": cfg}, ["draws.csv", "fit_summary.json"])
    print(f"max R-hat {diag['max_rhat']:.3f}, min bulk ESS {diag['min_ess_bulk']:.0f}, "
          f"divergences {diag['n_divergent']}")
    if not converged:
        print(f"not converged: max R-hat {diag['max_rhat']:.3f} > {RHAT_LIMIT}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _load_fit(fit_dir):
    from bdarch.model import ModelSpec

    fit_dir = Path(fit_dir)
    if fit_dir.is_file():
        fit_dir = fit_dir.parent
    summary_path = fit_dir / "fit_summary.json"
    if not summary_path.is_file():
        raise UsageError(f"no fit_summary.json in {fit_dir}")
    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    spec = ModelSpec.from_dict(summary["model"])
    rows = _read_dicts(fit_dir / "draws.csv")
    if not rows:
        raise UsageError("draw file is empty")
    names = [k for k in rows[0] if k != "chain"]
    draws = np.array([[float(r[n]) for n in names] for r in rows])
    return summary, spec, draws


def cmd_forecast(args) -> int:
    from bdarch.forecast import predict

    if args.horizon is None or args.horizon <= 0:
        raise UsageError("--horizon must be a positive integer")
    summary, spec, draws = _load_fit(args.fit)
    data = summary["data"]
    series = read_series(args.data or data["path"], args.format or data.get("format", "wide"))
    if series.names != summary["component_names"]:
        raise UsageError(f"data components {series.names} differ from the fit's {summary['component_names']}")
    series = series[: data["train_end"]]
    seed = _resolve_seed(args.seed)
    fc = predict(spec, draws, series, args.horizon, np.random.default_rng(seed), point=args.point)
    rows = fc.rows()
    cols = ["time", "component", "point", "lower_95", "upper_95", "lower_50", "upper_50"]
    out = _output_dir(args.out, {}) / "forecast.csv"
    _write_dicts(out, rows, cols)
    if fc.n_invalid:
        print(f"{fc.n_invalid} of {fc.paths.shape[0]} paths invalid and excluded", file=sys.stderr)
    print(f"wrote {len(rows)} rows to {out} (seed {seed})")
    return EXIT_OK


def _load_actuals(path, fmt):
    s = read_series(path, fmt)
    return {(str(t), c): float(v) for t, row in zip(s.time_index, s.values) for c, v in zip(s.names, row)}


def cmd_evaluate(args) -> int:
    from bdarch.metrics import MetricsReport

    fc_rows = _read_dicts(args.forecast)
    if not fc_rows:
        raise UsageError("forecast file is empty")
    actual = _load_actuals(args.actuals, args.format or "wide")
    names, times = [], []
    for r in fc_rows:
        if r["component"] not in names:
            names.append(r["component"])
        if r["time"] not in times:
            times.append(r["time"])
    lookup = {(r["time"], r["component"]): r for r in fc_rows}
    for key in [(t, c) for t in times for c in names]:
        if key not in lookup:
            raise UsageError(f"forecast lacks time {key[0]}, component {key[1]}")
        if key not in actual:
            raise UsageError(f"actuals lack time {key[0]}, component {key[1]}")
    grid = lambda col: np.array([[float(lookup[(t, c)][col]) for c in names] for t in times])  # noqa: E731
    y = np.array([[actual[(t, c)] for c in names] for t in times])
    has_iv = all(lookup[(times[0], names[0])].get(k) not in (None, "") for k in ("lower_95", "upper_95"))
    rep = MetricsReport.compute(y, grid("point"), grid("lower_95") if has_iv else None,
                                grid("upper_95") if has_iv else None, names, scale=args.scale)
    rows = rep.rows()
    out = _output_dir(args.out, {})
    _write_dicts(out / "evaluation.csv", rows, ["component", "frmse", "fmae", "frss", "frss_scaled_data", "coverage"])
    print(rep.table())
    return EXIT_OK


def _parse_pq(text):
    out = []
    for tok in text.split(","):
        p, _, q = tok.partition(":")
        try:
            out.append((int(p), int(q)))
        except ValueError:
            raise UsageError(f"bad P:Q pair {tok!r}") from None
    return out


def _parse_ints(text):
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise UsageError(f"bad integer list {text!r}") from None


def _live_cells(args, cfg):
    """Fit, forecast and score every grid cell on the validation window."""
    from bdarch.covariates import CovariateSpec
    from bdarch.forecast import predict
    from bdarch.metrics import fmae, frss
    from bdarch.model import Priors

    sw = cfg.get("sweep", {})
    split = cfg.get("split", {})
    data_path = args.data or cfg.get("data", {}).get("path")
    if not data_path:
        raise UsageError("sweep needs --metrics or --data")
    series = read_series(data_path, cfg.get("data", {}).get("format", "wide"))
    train_end = args.train_end or split.get("train_end")
    valid_end = args.valid_end or split.get("valid_end")
    if not train_end or not valid_end or not 0 < train_end < valid_end <= series.T:
        raise UsageError("need 0 < train_end < valid_end <= T for the validation split")
    k_grid = _parse_ints(args.k_year) if args.k_year else sw.get("k_year", [6, 8, 10, 12, 14, 16, 18])
    pq_grid = _parse_pq(args.pq) if args.pq else [tuple(x) for x in sw.get("pq", [[0, 1], [1, 1], [2, 1]])]
    base_pq = tuple(sw.get("base_pq", [1, 0]))
    period = float(sw.get("period_year", 365.25))
    model_cfg = dict(cfg.get("model", {}))
    base_mean = CovariateSpec.from_dict(model_cfg.pop("mean_covariates", {}))
    priors = Priors.from_dict(cfg.get("priors", "airbnb"))
    seed = _resolve_seed(args.seed if args.seed is not None else cfg.get("seed"))
    sampler = _sampler_config(cfg.get("sampler", {}), args, seed)
    train, valid = series[:train_end], series.values[train_end:valid_end]

    def score(P, Q, K):
        seasonal = tuple(b for b in base_mean.seasonal if b[0] != period) + ((period, K),)
        mean_cov = CovariateSpec(base_mean.include_intercept, base_mean.include_trend, seasonal,
                                 base_mean.share_across_components)
        mc = dict(model_cfg, P=P, Q=Q, mean_covariates=mean_cov.to_dict())
        spec = build_model_spec(mc, series.names)
        draws = _fit(train, spec, priors, sampler)
        fc = predict(spec, draws, train, valid.shape[0], np.random.default_rng(seed))
        cell = {"P": P, "Q": Q, "K_year": K, "fmae": fmae(valid, fc.point)[1], "frss": frss(valid, fc.point)[1]}
        log.info("cell %s", cell)
        return cell

    s1 = [dict(score(*base_pq, K), stage=1) for K in k_grid]
    w1 = select_stage1(s1)
    s2 = [dict(score(P, Q, int(w1["K_year"])), stage=2) for P, Q in pq_grid if (P, Q) != base_pq]
    return s1 + s2, seed


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.metrics:
        cells = _read_dicts(args.metrics)
        for c in cells:
            missing = [k for k in ("P", "Q", "K_year", "fmae") if k not in c]
            if missing:
                raise UsageError(f"metrics file lacks column {missing[0]!r}")
            c.setdefault("stage", "1")
        seed = None
    else:
        cells, seed = _live_cells(args, cfg)
    res = sweep_from_cells(cells, args.criterion)
    out = _output_dir(args.out, cfg)
    cols = ["stage", "P", "Q", "K_year", "fmae", "frss"]
    _write_dicts(out / "sweep.csv", [{k: c.get(k) for k in cols} for c in cells], cols)
    best = {k: res["stage2"].get(k) for k in ("P", "Q", "K_year", "fmae", "frss")}
    (out / "sweep_best.json").write_text(json.dumps({"stage1": {k: res["stage1"].get(k) for k in cols},
                                                     "best": best}, indent=2, default=str), encoding="utf-8")
    _write_manifest(out, "sweep", seed, {"args": vars(args), "config": cfg}, ["sweep.csv", "sweep_best.json"])
    print(f"stage 1: K_year={res['stage1']['K_year']}  best: P={best['P']} Q={best['Q']} "
          f"K_year={best['K_year']} FMAE={best['fmae']} FRSS={best.get('frss')}")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser

def _add_sampler_flags(p):
    p.add_argument("--chains", type=int)
    p.add_argument("--warmup", type=int)
    p.add_argument("--draws", type=int, help="retained draws per chain")
    p.add_argument("--target-accept", dest="target_accept", type=float)
    p.add_argument("--max-depth", dest="max_depth", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bdarch", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a simulation study")
    p.add_argument("--study", type=int, required=True)
    p.add_argument("--replicates", type=int, default=50)
    p.add_argument("--T", type=int, default=100)
    p.add_argument("--train-len", dest="train_len", type=int, default=60)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--out")
    _add_sampler_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="sample the posterior of one model")
    p.add_argument("--data")
    p.add_argument("--format", choices=["wide", "long"])
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--variant", choices=["BDARMA", "BDARMA_DARCH", "BTVARMA"])
    for flag in ("P", "Q", "L", "K"):
        p.add_argument(f"--{flag}", type=int)
    p.add_argument("--ref-component", dest="ref_component")
    p.add_argument("--priors", help="prior preset name (simulation, airbnb)")
    p.add_argument("--train-end", dest="train_end", type=int, help="use rows 1..N only")
    p.add_argument("--seed", type=int)
    _add_sampler_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("forecast", help="posterior-predictive forecast from a fit directory")
    p.add_argument("--fit", required=True, help="directory holding draws.csv and fit_summary.json")
    p.add_argument("--data")
    p.add_argument("--format", choices=["wide", "long"])
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--point", choices=["mu", "y"], default="mu")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("evaluate", help="score a forecast CSV against actual shares")
    p.add_argument("--forecast", required=True)
    p.add_argument("--actuals", required=True)
    p.add_argument("--format", choices=["wide", "long"])
    p.add_argument("--scale", type=float, default=1.0, help="display multiplier, e.g. 100")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="two-stage validation-grid model selection")
    p.add_argument("--metrics", help="CSV of precomputed cells: stage,P,Q,K_year,fmae[,frss]")
    p.add_argument("--data")
    p.add_argument("--config")
    p.add_argument("--train-end", dest="train_end", type=int)
    p.add_argument("--valid-end", dest="valid_end", type=int)
    p.add_argument("--k-year", dest="k_year", help="comma-separated harmonics, e.g. 6,8,10")
    p.add_argument("--pq", help="comma-separated P:Q pairs, e.g. 0:1,1:1,2:1")
    p.add_argument("--criterion", choices=["fmae", "frss"], default="fmae")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    _add_sampler_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bdarch {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
