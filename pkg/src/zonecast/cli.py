"""Command-line front end wiring the pipeline end to end.

Subcommands: synth | ingest | fit | predict | attack | measure | detect |
report. All artifacts are plain CSV / text / SVG files under the output
directory, and every stage draws its randomness from the single run seed via
a stage-name hash, so any stage can be re-run independently and byte-exactly.

Exit codes: 0 success, 1 internal error, 2 user/config error.
"""

from __future__ import annotations

import csv
import functools
import hashlib
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np
import yaml

from . import ingest
from .attack import AttackKind, AttackSpec, inject_gaussian, lp_norm, optimize_attack
from .core import TimeSeries, Unit, ZonalDataset, align
from .detect import calibrate_baseline, detection_experiment, evaluate_constraints
from .errors import ZonecastError
from .features import DesignBuilder, train_test_split
from .regress import FittedModel, fit_and_evaluate, predict
from .similarity import (FAMILY_MEASURES, MEASURE_NAMES, SimilarityParams,
                         similarity_vector)
from .synth import SynthConfig, generate_synthetic

log = logging.getLogger(__name__)

GRID_COLUMNS = ("no_model", "f1_clean", "f2_clean", "f1_attacked", "f2_attacked")

DEFAULTS = {
    "zones": ["WEST", "FAR_WEST"],
    "synth": {"hours": 4000, "zone_count": 2, "shared_weather_weight": 0.9,
              "noise_sd": 12.0},
    "model": {"split_ratio": 0.7},
    "similarity": {"minkowski_p": 3.0, "cor2_beta": 1.0, "max_lag": 48,
                   "sax_a": 4},
    "attack": {"kind": "gaussian", "target_zone": "WEST", "mean": 0.0, "sd": 1.0,
               "epsilon": 1.0, "p": "inf", "direction": -1, "max_iters": 200,
               "model": "f2"},
    "detect": {"tau": 3.0, "window_length": 168, "n_windows": 50,
               "n_trials": 20},
}


def stage_seed(master: int, stage: str) -> int:
    """Per-stage seed derived from the run seed by hashing the stage name."""
    digest = hashlib.sha256(f"{master}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = v
    return out


class RunConfig:
    def __init__(self, path: str | None, out: str, seed: int):
        data = {}
        if path is not None:
            p = Path(path)
            if not p.exists():
                raise click.UsageError(f"config file not found: {p}")
            data = yaml.safe_load(p.read_text()) or {}
            if not isinstance(data, dict):
                raise click.UsageError(f"config file {p} must map keys to values")
        self.data = _deep_merge(DEFAULTS, data)
        self.out = Path(self.data.get("out", out))
        self.seed = int(self.data.get("seed", seed))

    def section(self, name: str) -> dict:
        return self.data.get(name, {})

    def similarity_params(self) -> SimilarityParams:
        s = self.section("similarity")
        return SimilarityParams(
            minkowski_p=float(s.get("minkowski_p", 3.0)),
            cor2_beta=float(s.get("cor2_beta", 1.0)),
            max_lag=int(s.get("max_lag", 48)),
            sax_w=s.get("sax_w"),
            sax_a=int(s.get("sax_a", 4)),
        )

    def attack_spec(self, seed: int) -> AttackSpec:
        a = self.section("attack")
        kind = AttackKind(a.get("kind", "gaussian"))
        p_raw = a.get("p", "inf")
        p = math.inf if str(p_raw) in ("inf", "Infinity") else float(p_raw)
        return AttackSpec(
            kind=kind, target_zone=a.get("target_zone", "WEST"), seed=seed,
            mean=float(a.get("mean", 0.0)), sd=float(a.get("sd", 1.0)),
            epsilon=float(a.get("epsilon", 1.0)), p=p,
            direction=int(a.get("direction", -1)),
            max_iters=int(a.get("max_iters", 200)),
            step_size=a.get("step_size"),
        )


def guarded(fn):
    """Map errors to the documented exit codes."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except (FileNotFoundError, ZonecastError, ValueError, KeyError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except Exception as exc:  # pragma: no cover - defensive
            click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(1)
    return wrapper


@click.group()
@click.option("--config", type=str, default=None, help="YAML run configuration.")
@click.option("--out", type=str, default="out", help="Output directory.")
@click.option("--seed", type=int, default=1, help="Master run seed.")
@click.option("--verbose", is_flag=True)
@click.pass_context
def main(ctx, config, out, seed, verbose):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING)
    ctx.obj = RunConfig(config, out, seed)
    ctx.obj.out.mkdir(parents=True, exist_ok=True)


# --- dataset I/O helpers ---------------------------------------------------

def _dataset_paths(cfg: RunConfig) -> tuple[Path, Path]:
    return cfg.out / "load.csv", cfg.out / "temperature.csv"


def _load_zones(cfg: RunConfig) -> dict[str, tuple[TimeSeries, TimeSeries]]:
    """Aligned per-zone (load, temperature) pairs from the working dataset."""
    load_path, temp_path = _dataset_paths(cfg)
    for p in (load_path, temp_path):
        if not p.exists():
            raise FileNotFoundError(f"missing dataset file: {p} (run synth or ingest first)")
    loads, _ = ingest.parse_load_file(load_path)
    temps, _ = ingest.parse_temperature_file(temp_path)
    zones = {}
    for zid, gapped in loads.items():
        if zid not in temps:
            raise ZonecastError(f"zone {zid} has no temperature station")
        load_ts, _ = ingest.clean(gapped, series_id=zid)
        temp_ts, _ = ingest.clean(temps[zid], series_id=zid)
        zones[zid] = (load_ts, temp_ts)
    aligned = align([s for pair in zones.values() for s in pair])
    it = iter(aligned)
    return {zid: (next(it), next(it)) for zid in zones}


def _load_dataset(cfg: RunConfig) -> ZonalDataset:
    zones = _load_zones(cfg)
    if len(zones) < 2:
        raise ZonecastError("this stage needs at least 2 zones in the dataset")
    return ZonalDataset(zones)


def _write_dataset(cfg: RunConfig, dataset: ZonalDataset) -> None:
    load_path, temp_path = _dataset_paths(cfg)
    ingest.write_load_file(load_path, {z: dataset.load(z) for z in dataset.zone_ids})
    ingest.write_temperature_file(temp_path,
                                  {z: dataset.temperature(z) for z in dataset.zone_ids})


def _model_path(cfg: RunConfig, zone: str, kind: str) -> Path:
    return cfg.out / f"model_{zone}_{kind}.txt"


def _load_model(cfg: RunConfig, zone: str, kind: str) -> FittedModel:
    path = _model_path(cfg, zone, kind)
    if not path.exists():
        raise FileNotFoundError(f"missing model file: {path} (run fit first)")
    return FittedModel.load(path)


def _attacked_temperature(cfg: RunConfig) -> dict[str, TimeSeries] | None:
    path = cfg.out / "temperature_attacked.csv"
    if not path.exists():
        return None
    series, _ = ingest.parse_temperature_file(path)
    out = {}
    for station, gapped in series.items():
        ts, _ = ingest.clean(gapped, series_id=station)
        out[station] = ts
    return out


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# --- subcommands -----------------------------------------------------------

@main.command()
@click.option("--hours", type=int, default=None)
@click.option("--zone-count", type=int, default=None)
@click.pass_obj
@guarded
def synth(cfg: RunConfig, hours, zone_count):
    """Generate a seeded synthetic dataset and write it in the file formats."""
    s = cfg.section("synth")
    sc = SynthConfig(
        n_hours=hours or int(s.get("hours", 4000)),
        seed=stage_seed(cfg.seed, "synth"),
        zone_count=zone_count or int(s.get("zone_count", 2)),
        shared_weather_weight=float(s.get("shared_weather_weight", 0.9)),
        noise_sd=float(s.get("noise_sd", 12.0)),
    )
    dataset = generate_synthetic(sc)
    _write_dataset(cfg, dataset)
    click.echo(f"wrote {cfg.out / 'load.csv'} and {cfg.out / 'temperature.csv'} "
               f"({sc.n_hours} hours, {sc.zone_count} zones)")


@main.command("ingest")
@click.option("--load-file", "load_file", type=str, required=True)
@click.option("--temp-file", "temp_file", type=str, required=True)
@click.pass_obj
@guarded
def ingest_cmd(cfg: RunConfig, load_file, temp_file):
    """Parse and clean raw load/temperature files into the working dataset."""
    for p in (load_file, temp_file):
        if not Path(p).exists():
            raise FileNotFoundError(f"input file not found: {p}")
    loads, load_report = ingest.parse_load_file(load_file)
    temps, temp_report = ingest.parse_temperature_file(temp_file)
    zones = {}
    for zid, gapped in loads.items():
        if zid not in temps:
            raise ZonecastError(f"zone {zid} has no matching temperature station")
        lts, _ = ingest.clean(gapped, load_report, series_id=zid)
        tts, _ = ingest.clean(temps[zid], temp_report, series_id=zid)
        lts, tts = align([lts, tts])
        zones[zid] = (lts, tts)
    aligned = align([s for pair in zones.values() for s in pair])
    it = iter(aligned)
    dataset = ZonalDataset({zid: (next(it), next(it)) for zid in zones})
    _write_dataset(cfg, dataset)

    rows = []
    for name, report in (("load", load_report), ("temperature", temp_report)):
        rows.append([name, report.rows_read, report.rows_interpolated,
                     report.rows_dropped])
    _write_csv(cfg.out / "cleaning_report.csv",
               ["file", "rows_read", "rows_interpolated", "rows_dropped"], rows)
    click.echo(f"ingested {len(zones)} zones over {dataset.n_hours} hours")


def _fit_all(cfg: RunConfig, zones: dict
             ) -> dict[tuple[str, str], tuple[DesignBuilder, FittedModel]]:
    ratio = float(cfg.section("model").get("split_ratio", 0.7))
    split_seed = stage_seed(cfg.seed, "split")
    out = {}
    for zone, (load_ts, temp_ts) in zones.items():
        for kind in ("f1", "f2"):
            builder = DesignBuilder(kind, load_ts, temp_ts)
            train, test = train_test_split(builder.design(), ratio, split_seed)
            out[(zone, kind)] = (builder, fit_and_evaluate(train, test))
    return out


@main.command()
@click.pass_obj
@guarded
def fit(cfg: RunConfig):
    """Fit models f1 and f2 per zone; write models and a metrics table."""
    zones = _load_zones(cfg)
    rows = []
    for (zone, kind), (_, model) in _fit_all(cfg, zones).items():
        model.save(_model_path(cfg, zone, kind))
        for scope, st in (("train", model.train_stats), ("test", model.test_stats)):
            rows.append([zone, kind, scope, repr(st.r2), repr(st.adj_r2),
                         repr(st.mae)])
    _write_csv(cfg.out / "metrics.csv",
               ["zone", "model", "scope", "r2", "adj_r2", "mae"], rows)
    click.echo(f"wrote models and {cfg.out / 'metrics.csv'}")


@main.command("predict")
@click.pass_obj
@guarded
def predict_cmd(cfg: RunConfig):
    """Write per-zone forecast files for both models."""
    zones = _load_zones(cfg)
    for zone, (load_ts, temp_ts) in zones.items():
        for kind in ("f1", "f2"):
            model = _load_model(cfg, zone, kind)
            builder = DesignBuilder(kind, load_ts, temp_ts)
            design = builder.design()
            yhat = predict(model, design)
            rows = [[ts.isoformat(), repr(float(a)), repr(float(f))]
                    for ts, a, f in zip(design.row_timestamps(), design.target, yhat)]
            _write_csv(cfg.out / f"forecast_{zone}_{kind}.csv",
                       ["timestamp", "actual_mw", "forecast_mw"], rows)
    click.echo("wrote forecast files")


@main.command("attack")
@click.pass_obj
@guarded
def attack_cmd(cfg: RunConfig):
    """Perturb the target zone's temperature; write it plus a summary record."""
    zones = _load_zones(cfg)
    spec = cfg.attack_spec(seed=stage_seed(cfg.seed, "attack"))
    if spec.target_zone not in zones:
        raise ZonecastError(f"target zone {spec.target_zone!r} not in dataset")
    model_kind = cfg.section("attack").get("model", "f2")
    model = _load_model(cfg, spec.target_zone, model_kind)
    target_load, target_temp = zones[spec.target_zone]
    builder = DesignBuilder(model_kind, target_load, target_temp)

    if spec.kind is AttackKind.GAUSSIAN:
        perturbed_full = inject_gaussian(target_temp, spec)
        delta = perturbed_full.values - target_temp.values
        rows_idx = builder.rows
        shift = predict(model, builder.design(perturbed_full.values[rows_idx])) \
            - predict(model, builder.design())
        summary = [spec.kind.value, "", "", repr(lp_norm(delta, 2)),
                   repr(float(np.sum(shift))), 0, True]
    else:
        result = optimize_attack(model, builder, spec)
        perturbed_full = target_temp.with_values(_overlay(target_temp, result))
        summary = [spec.kind.value, repr(spec.epsilon),
                   "inf" if spec.p == math.inf else repr(spec.p),
                   repr(result.delta_norm), repr(result.total_shift_mw),
                   result.iterations_used, result.feasible]

    stations = {z: temp for z, (_, temp) in zones.items()}
    stations[spec.target_zone] = perturbed_full
    ingest.write_temperature_file(cfg.out / "temperature_attacked.csv", stations)
    _write_csv(cfg.out / "attack_summary.csv",
               ["kind", "epsilon", "p", "delta_norm", "total_shift_mw",
                "iterations", "feasible"], [summary])
    click.echo(f"wrote {cfg.out / 'temperature_attacked.csv'}")


def _overlay(template: TimeSeries, result) -> np.ndarray:
    """Full-length temperature values with the attack window replaced."""
    values = template.values.copy()
    p = result.perturbed_temperature
    i0 = p.start_hour - template.start_hour
    values[i0:i0 + len(p)] = p.values
    return values


def _forecast_pairs(cfg: RunConfig, dataset: ZonalDataset):
    """Clean and (when present) attacked forecast pairs for the grid."""
    spec_zone = cfg.section("attack").get("target_zone", "WEST")
    other = next(z for z in dataset.zone_ids if z != spec_zone)
    attacked_temp = _attacked_temperature(cfg)
    pairs: dict[str, tuple[np.ndarray, np.ndarray] | None] = {
        "no_model": (dataset.load(spec_zone).values, dataset.load(other).values)}
    for kind in ("f1", "f2"):
        mt = _load_model(cfg, spec_zone, kind)
        mo = _load_model(cfg, other, kind)
        bt = DesignBuilder(kind, dataset.load(spec_zone), dataset.temperature(spec_zone))
        bo = DesignBuilder(kind, dataset.load(other), dataset.temperature(other))
        ft, fo = predict(mt, bt.design()), predict(mo, bo.design())
        pairs[f"{kind}_clean"] = (ft, fo)
        if attacked_temp is not None and spec_zone in attacked_temp:
            att = attacked_temp[spec_zone]
            att_rows = att.values[bt.rows + (dataset.temperature(spec_zone).start_hour
                                             - att.start_hour)]
            pairs[f"{kind}_attacked"] = (predict(mt, bt.design(att_rows)), fo)
        else:
            pairs[f"{kind}_attacked"] = None
    return pairs


@main.command()
@click.pass_obj
@guarded
def measure(cfg: RunConfig):
    """Emit the similarity grid: measures x (raw, f1/f2 clean, f1/f2 attacked)."""
    dataset = _load_dataset(cfg)
    params = cfg.similarity_params()
    pairs = _forecast_pairs(cfg, dataset)
    vectors = {col: (similarity_vector(p[0], p[1], params) if p is not None else None)
               for col, p in pairs.items()}
    rows = []
    for name in MEASURE_NAMES:
        row = [name]
        for col in GRID_COLUMNS:
            vec = vectors[col]
            if vec is None:
                row.append("absent")
            else:
                row.append(repr(vec.values[name]) if name in vec.values else "")
        rows.append(row)
    _write_csv(cfg.out / "similarity_grid.csv", ["measure", *GRID_COLUMNS], rows)
    absent = [c for c, v in vectors.items() if v is None]
    click.echo(f"wrote {cfg.out / 'similarity_grid.csv'}"
               + (f" (absent columns: {', '.join(absent)})" if absent else ""))


@main.command("detect")
@click.pass_obj
@guarded
def detect_cmd(cfg: RunConfig):
    """Calibrate a clean baseline, score verdicts, and run the experiment."""
    dataset = _load_dataset(cfg)
    d = cfg.section("detect")
    tau = float(d.get("tau", 3.0))
    window = int(d.get("window_length", 168))
    n_windows = int(d.get("n_windows", 50))
    n_trials = int(d.get("n_trials", 20))
    params = cfg.similarity_params()
    spec = cfg.attack_spec(seed=stage_seed(cfg.seed, "attack"))

    result = detection_experiment(
        dataset, cfg.section("attack").get("model", "f2"), spec, tau=tau,
        n_trials=n_trials, seed=stage_seed(cfg.seed, "detect"),
        split_ratio=float(cfg.section("model").get("split_ratio", 0.7)),
        window_length=window, n_windows=n_windows, params=params)

    _write_csv(cfg.out / "experiment.csv",
               ["detection_rate", "false_positive_rate", "mean_abs_shift_mw",
                "n_trials"],
               [[repr(result.detection_rate), repr(result.false_positive_rate),
                 repr(result.mean_abs_forecast_shift), result.n_trials]])

    # headline verdict: attacked vs clean forecasts on the final window
    pairs = _forecast_pairs(cfg, dataset)
    model_kind = cfg.section("attack").get("model", "f2")
    rows = []
    attacked_pair = pairs.get(f"{model_kind}_attacked")
    if attacked_pair is not None:
        ft, fo = pairs[f"{model_kind}_clean"]
        baseline = calibrate_baseline(ft, fo, window, max(n_windows, 20),
                                      stage_seed(cfg.seed, "baseline"), params)
        at, ao = attacked_pair
        verdict = evaluate_constraints(at[-window:], ao[-window:], baseline, tau)
        for name, v in verdict.per_measure.items():
            rows.append([name, repr(v.observed), repr(v.z), repr(v.g), v.flagged])
    _write_csv(cfg.out / "verdicts.csv",
               ["measure", "observed", "z", "g", "flagged"], rows)
    click.echo(f"detection rate {result.detection_rate:.2f}, "
               f"false positive rate {result.false_positive_rate:.2f}")


@main.command()
@click.pass_obj
@guarded
def report(cfg: RunConfig):
    """Render the similarity grid as aligned text plus SVG line plots."""
    grid_path = cfg.out / "similarity_grid.csv"
    if not grid_path.exists():
        raise FileNotFoundError(f"missing {grid_path} (run measure first)")
    with grid_path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        grid = {row[0]: row[1:] for row in reader}

    family_rows = [(family, grid[m]) for family, m in FAMILY_MEASURES.items()]
    widths = [max(len("method"), *(len(f) for f, _ in family_rows))]
    for j, col in enumerate(GRID_COLUMNS):
        widths.append(max(len(col), *(len(_fmt_cell(r[j])) for _, r in family_rows)))
    lines = ["  ".join(h.ljust(w) for h, w in zip(["method", *GRID_COLUMNS], widths))]
    for family, r in family_rows:
        cells = [family.ljust(widths[0])]
        cells += [_fmt_cell(v).rjust(w) for v, w in zip(r, widths[1:])]
        lines.append("  ".join(cells))
    (cfg.out / "report.txt").write_text("\n".join(lines) + "\n")

    _render_plots(cfg)
    click.echo(f"wrote {cfg.out / 'report.txt'} and plots")


def _fmt_cell(value: str) -> str:
    if value in ("absent", ""):
        return value or "-"
    return f"{float(value):.6g}"


def _render_plots(cfg: RunConfig) -> None:
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt
    matplotlib.rcParams["svg.hashsalt"] = str(cfg.seed)

    dataset = _load_dataset(cfg)
    target = cfg.section("attack").get("target_zone", "WEST")
    model_kind = cfg.section("attack").get("model", "f2")
    model = _load_model(cfg, target, model_kind)
    builder = DesignBuilder(model_kind, dataset.load(target), dataset.temperature(target))
    design = builder.design()
    yhat = predict(model, design)
    tail = slice(-min(336, len(yhat)), None)
    hours = np.arange(len(yhat))[tail]

    fig, ax = plt.subplots(figsize=(9, 4))
    ax.plot(hours, design.target[tail], label="actual", lw=1.0)
    ax.plot(hours, yhat[tail], label=f"{model_kind} forecast", lw=1.0)
    ax.set_xlabel("hour"); ax.set_ylabel("load (MW)")
    ax.set_title(f"{target}: forecast vs actual")
    ax.legend()
    fig.savefig(cfg.out / f"plot_forecast_{target}_{model_kind}.svg",
                metadata={"Date": None})
    plt.close(fig)

    attacked = _attacked_temperature(cfg)
    if attacked is not None and target in attacked:
        att = attacked[target]
        att_rows = att.values[builder.rows + (dataset.temperature(target).start_hour
                                              - att.start_hour)]
        yatt = predict(model, builder.design(att_rows))
        fig, ax = plt.subplots(figsize=(9, 4))
        ax.plot(hours, yhat[tail], label="clean forecast", lw=1.0)
        ax.plot(hours, yatt[tail], label="attacked forecast", lw=1.0)
        ax.set_xlabel("hour"); ax.set_ylabel("load (MW)")
        ax.set_title(f"{target}: clean vs attacked forecast")
        ax.legend()
        fig.savefig(cfg.out / f"plot_attack_{target}_{model_kind}.svg",
                    metadata={"Date": None})
        plt.close(fig)


if __name__ == "__main__":  # pragma: no cover
    main()
