"""``maintvar`` command line.

Subcommands mirror the pipeline stages: validate, featurize, screen,
forecast, backtest, importance, simulate. Settings come from an optional
``--config`` file of ``key = value`` lines; command-line flags win.

Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import sys
import warnings
from pathlib import Path

import numpy as np

from maintvar import evaluate, ingest, rfimpact, statcheck, synth, textfeat, varmodel
from maintvar.errors import DataError, MaintvarError
from maintvar.plot import emit_plot
from maintvar.rng import resolve_seed

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


# (dest, type, built-in default)
SETTINGS = {
    "input": (str, None),
    "schema": (str, None),
    "lexicon": (str, None),
    "matrix": (str, None),
    "out": (str, "."),
    "impute": (str, "linear"),
    "scaling": (str, "binary"),
    "target": (str, textfeat.TARGET_LABEL),
    "corr_threshold": (float, statcheck.DEFAULT_CORR_THRESHOLD),
    "alpha": (float, statcheck.DEFAULT_ALPHA),
    "max_lag": (int, statcheck.DEFAULT_MAX_LAG),
    "p_max": (int, varmodel.DEFAULT_P_MAX),
    "horizon": (int, 7),
    "horizons": (_csv_ints, list(evaluate.DEFAULT_HORIZONS)),
    "origins": (int, 1),
    "difference": (lambda v: str(v).lower() in ("1", "true", "yes", "on"), False),
    "n_trees": (int, 100),
    "max_depth": (int, 8),
    "min_leaf": (int, 2),
    "seed": (int, None),
    "kind": (str, "plant"),
    "days": (int, 1200),
}


def _add(p, *names, dest, help=None, choices=None, flag=False):
    if flag:
        p.add_argument(*names, dest=dest, action="store_const", const=True, default=None, help=help)
    else:
        p.add_argument(*names, dest=dest, default=None, help=help, choices=choices)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="maintvar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help):
        p = sub.add_parser(name, help=help)
        _add(p, "--config", dest="config", help="key = value settings file; flags override it")
        _add(p, "--out", "-o", dest="out", help="output directory (default: .)")
        _add(p, "--seed", dest="seed", help="master seed (fallback: $MAINTVAR_SEED, then 0)")
        return p

    p = command("validate", "check a plant CSV against the record invariants")
    _add(p, "--input", "-i", dest="input", help="13-column plant CSV")
    _add(p, "--schema", dest="schema", help="column mapping file")

    p = command("featurize", "extract indicator columns from the issues text")
    _add(p, "--input", "-i", dest="input", help="13-column plant CSV")
    _add(p, "--schema", dest="schema", help="column mapping file")
    _add(p, "--lexicon", dest="lexicon", help="flag/stop word lexicon (default: bundled)")
    _add(p, "--impute", dest="impute", choices=ingest.POLICIES, help="gap policy (default: linear)")
    _add(p, "--scaling", dest="scaling", choices=("binary", "occurrence_pct"), help="indicator scaling")

    p = command("screen", "correlation and Granger screening of indicators")
    _add(p, "--matrix", "-m", dest="matrix", help="feature matrix CSV")
    _add(p, "--target", dest="target")
    _add(p, "--corr-threshold", dest="corr_threshold")
    _add(p, "--alpha", dest="alpha")
    _add(p, "--max-lag", dest="max_lag")

    p = command("forecast", "fit VAR(p) with AIC-selected p and forecast ahead")
    _add(p, "--matrix", "-m", dest="matrix")
    _add(p, "--target", dest="target")
    _add(p, "--p-max", dest="p_max")
    _add(p, "--horizon", "-H", dest="horizon", help="days ahead (default: 7)")
    _add(p, "--difference", dest="difference", flag=True, help="model first differences")

    p = command("backtest", "hold-out evaluation at several horizons")
    _add(p, "--matrix", "-m", dest="matrix")
    _add(p, "--target", dest="target")
    _add(p, "--p-max", dest="p_max")
    _add(p, "--horizons", dest="horizons", help="comma-separated days (default: 3,5,7,10,12,30)")
    _add(p, "--origins", dest="origins", help="rolling origins per horizon (default: 1)")
    _add(p, "--difference", dest="difference", flag=True)

    p = command("importance", "random-forest impact of indicators on generation")
    _add(p, "--matrix", "-m", dest="matrix")
    _add(p, "--target", dest="target")
    _add(p, "--n-trees", dest="n_trees")
    _add(p, "--max-depth", dest="max_depth")
    _add(p, "--min-leaf", dest="min_leaf")

    p = command("simulate", "write a synthetic plant log or VAR matrix")
    _add(p, "--kind", dest="kind", choices=("plant", "var"))
    _add(p, "--days", dest="days")
    return parser


def resolve_settings(args: argparse.Namespace) -> dict:
    """Merge built-in defaults < config file < command-line flags."""
    from_file = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise DataError(f"config file not found: {path}")
        from_file = ingest.read_key_values(path)
        unknown = set(from_file) - set(SETTINGS)
        if unknown:
            raise UsageError(f"{path}: unknown settings {sorted(unknown)}")
    out = {}
    for dest, (conv, default) in SETTINGS.items():
        raw = getattr(args, dest, None)
        if raw is None:
            raw = from_file.get(dest)
        if raw is None:
            out[dest] = default
            continue
        try:
            out[dest] = conv(raw)
        except ValueError:
            raise UsageError(f"invalid value for {dest}: {raw!r}") from None
    out["seed"] = resolve_seed(out["seed"])
    for key in ("input", "schema", "lexicon", "matrix"):
        if out[key] is not None and not Path(out[key]).is_file():
            raise DataError(f"{key} file not found: {out[key]}")
    return out


def _require(cfg, key):
    if cfg[key] is None:
        raise UsageError(f"--{key} is required")
    return cfg[key]


def _outdir(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _progress(msg: str) -> None:
    print(msg, flush=True)


def _load_dataset(cfg) -> ingest.PlantDataset:
    schema = ingest.Schema.load(cfg["schema"]) if cfg["schema"] else ingest.Schema()
    return ingest.parse_dataset_csv(_require(cfg, "input"), schema)


def _load_matrix(cfg) -> textfeat.FeatureMatrix:
    return textfeat.read_matrix_csv(_require(cfg, "matrix"), cfg["target"])


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_gaps(path: Path, ds: ingest.PlantDataset) -> None:
    _write_rows(path, ["date", "field", "reason"], [(g.date.isoformat(), g.field, g.reason) for g in ds.gap_report])


# ---------------------------------------------------------------- commands

def cmd_validate(cfg) -> int:
    ds = _load_dataset(cfg)
    out = _outdir(cfg)
    violations = ingest.validate_dataset(ds)
    _write_rows(out / "validation.csv", ["date", "field", "rule"],
                [(v.date.isoformat(), v.field, v.rule) for v in violations])
    _write_gaps(out / "gap_report.csv", ds)
    _progress(f"{len(ds)} records, {len(violations)} violations, {len(ds.gap_report)} gap entries")
    return EXIT_OK


def cmd_featurize(cfg) -> int:
    ds = _load_dataset(cfg)
    lexicon = textfeat.FeatureLexicon.load(cfg["lexicon"]) if cfg["lexicon"] else textfeat.FeatureLexicon.default()
    ds = ingest.impute_missing(ds, cfg["impute"])
    fm = textfeat.build_feature_matrix(ds, lexicon)
    if cfg["scaling"] == "occurrence_pct":
        fm = textfeat.occurrence_scale(fm)
    out = _outdir(cfg)
    textfeat.write_matrix_csv(fm, out / "matrix.csv")
    log = []
    for rec in ds.records:
        hits = textfeat.extract_labels(rec.issues_text, lexicon)
        log.append((rec.date.isoformat(), ";".join(lab for lab in lexicon.labels if lab in hits)))
    _write_rows(out / "extraction_log.csv", ["date", "labels"], log)
    _write_gaps(out / "gap_report.csv", ds)
    _progress(f"featurized {len(ds)} days into {len(lexicon)} indicator columns")
    return EXIT_OK


def cmd_screen(cfg) -> int:
    fm = _load_matrix(cfg)
    report = statcheck.screen_features(fm, cfg["target"], cfg["corr_threshold"], cfg["alpha"], cfg["max_lag"])
    out = _outdir(cfg)
    report.write_csv(out / "screening.csv")
    textfeat.write_matrix_csv(fm.select(report.selected), out / "selected_matrix.csv")
    adf_rows = []
    for lab in report.selected:
        try:
            res = statcheck.adf_test(fm.column(lab))
            adf_rows.append((lab, repr(res.statistic), res.lags_used, repr(res.critical_values["5%"]), int(res.is_stationary_5pct)))
        except MaintvarError as exc:
            adf_rows.append((lab, "", "", "", f"n/a: {exc}"))
    _write_rows(out / "stationarity.csv", ["label", "adf_statistic", "lags_used", "critical_5pct", "stationary_5pct"], adf_rows)
    _progress(f"selected {len(report.selected)} of {len(fm.labels)} columns: {', '.join(report.selected)}")
    return EXIT_OK


def _future_dates(last, h):
    if isinstance(last, dt.date):
        return [(last + dt.timedelta(days=i)).isoformat() for i in range(1, h + 1)]
    return [f"t+{i}" for i in range(1, h + 1)]


def cmd_forecast(cfg) -> int:
    h = cfg["horizon"]
    if h < 1:
        raise UsageError(f"--horizon must be a positive integer, got {h}")
    fm = _load_matrix(cfg)
    values = np.asarray(fm.values)
    data = np.diff(values, axis=0) if cfg["difference"] else values
    p, records = varmodel.select_lag_order(data, min(cfg["p_max"], max(1, (len(data) - 2) // (len(fm.labels) + 1) - 1)))
    model = varmodel.fit_var(data, p)
    model = varmodel.VarModel(fm.labels, model.p, model.alpha, model.beta, model.residuals, model.sigma, model.t_eff)
    stable, rho = varmodel.is_stable(model)
    if not stable:
        warnings.warn(f"fitted VAR({p}) is not stable (spectral radius {rho:.6f}); forecast written anyway",
                      varmodel.UnstableModelWarning)
    fc = varmodel.forecast(model, data, h)
    if cfg["difference"]:
        fc = values[-1] + np.cumsum(fc, axis=0)
    out = _outdir(cfg)
    _write_rows(out / "forecast.csv", ["date", *fm.labels],
                [(d, *(repr(float(v)) for v in row)) for d, row in zip(_future_dates(fm.dates[-1], h), fc)])
    varmodel.dump_model(model, out / "model.txt")
    _write_rows(out / "lag_selection.csv", ["p", "aic", "k_params", "log_det_sigma", "t_eff"],
                [(r.candidate_p, repr(r.aic), r.k_params, repr(r.log_det_sigma), r.t_eff) for r in records])
    _progress(f"VAR({p}) fitted on {model.t_eff} rows; {h}-day forecast written")
    return EXIT_OK


def cmd_backtest(cfg) -> int:
    try:
        horizons = evaluate.normalize_horizons(cfg["horizons"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    fm = _load_matrix(cfg)
    report = evaluate.backtest(fm, horizons, cfg["p_max"], cfg["origins"], cfg["difference"])
    out = _outdir(cfg)
    report.write_table_csv(out / "table.csv")
    for r in report.rows:
        report.write_series_csv(r.horizon, out / f"series_{r.horizon}d.csv")
        emit_plot(list(zip(r.dates, r.actual, r.forecast)), out / f"plot_{r.horizon}d.svg",
                  f"{r.horizon} days ahead total power generation forecast (VAR({r.p}))")
    _progress(report.format_table())
    return EXIT_OK


def cmd_importance(cfg) -> int:
    fm = _load_matrix(cfg)
    conf = rfimpact.RFConfig(cfg["n_trees"], cfg["max_depth"], cfg["min_leaf"], cfg["seed"])
    model = rfimpact.fit_random_forest(fm, None, conf)
    out = _outdir(cfg)
    rfimpact.write_importance_csv(model, out / "importance.csv")
    if not model.has_splits:
        print("warning: no tree found a split; all importances are zero", file=sys.stderr)
    top = rfimpact.feature_importances(model)[0]
    _progress(f"{model.n_trees} trees; top feature {top[0]} ({top[1]:.3f})")
    return EXIT_OK


def cmd_simulate(cfg) -> int:
    out = _outdir(cfg)
    if cfg["kind"] == "plant":
        ds, truth = synth.synthetic_plant(cfg["days"], cfg["seed"])
        ingest.write_dataset_csv(ds, out / "plant.csv")
        _write_rows(out / "truth.csv", ["date", "labels"],
                    [(r.date.isoformat(), ";".join(sorted(t))) for r, t in zip(ds.records, truth.labels)])
    else:
        spec = evaluate.random_stable_spec(5, 2, cfg["days"], cfg["seed"])
        fm = evaluate.simulate_var(spec)
        textfeat.write_matrix_csv(fm, out / "matrix.csv")
    _progress(f"simulated {cfg['days']} days ({cfg['kind']})")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "featurize": cmd_featurize,
    "screen": cmd_screen,
    "forecast": cmd_forecast,
    "backtest": cmd_backtest,
    "importance": cmd_importance,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve_settings(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = COMMANDS[args.command](cfg)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return code
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MaintvarError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
