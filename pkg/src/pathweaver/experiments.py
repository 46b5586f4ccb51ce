"""Experiment runners: repeats, sweeps, aggregation, and artifact emission.

Each runner expands its experiment into a list of independent training
cells, executes them (optionally on a process pool), and aggregates the
survivors into a ``report.json`` plus byte-stable CSV artifacts under
``runs/`` and ``maps/``, described by a ``manifest.json``. Diverged runs are
excluded from aggregates with a warning and stay visible in the raw records
with a non-ok status.

Seeding is hierarchical: the dataset seed depends only on (base seed, task),
so every run of a task sees identical data, while each training cell gets
its own seed derived from its grid coordinates. The regulariser family is
deliberately left out of the cell seed, pairing the sweep families run by
run and making the beta = 0 sanity runs coincide exactly.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import asdict, dataclass
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .csvio import save_matrix_csv, save_table_csv
from .errors import ConfigError, TrainingDivergedError
from .graphops import (
    assemble,
    block_contrast,
    communicability_io,
    hop_io,
    hop_magnitude_profile,
    normalize,
    resolvent_io,
)
from .numerics import pearson
from .oracle import has_optimal_map, optimal_map, ridge_predict, save_optimal_map
from .regularizers import l1_whh_value, resolvent_penalty_value
from .rnn import (
    TrainConfig,
    load_checkpoint,
    mse,
    save_checkpoint,
    train,
)
from .taskgen import (
    LINEAR_KINDS,
    TASK_ORDER,
    TaskKind,
    TaskSpec,
    make_dataset,
    noise_timesteps,
    save_dataset,
)

FIG3_TASKS = TASK_ORDER[:4]
FIG5_TASKS = (TaskKind.MODULE_AVERAGING, TaskKind.ON_OFF_AVERAGING)
FIG5_FAMILIES = ("l1_whh", "resolvent_io")
CURVE_COLUMNS = ("epoch", "train_mse", "val_mse", "sparsity")


@dataclass
class AggregateReport:
    """Aggregated statistics plus the raw per-run records behind them."""

    experiment: str
    report: dict
    columns: list
    records: list


def summarize(values) -> dict:
    """Mean and SEM (sample std over sqrt(n)) of a metric across repeats."""
    arr = np.asarray(list(values), dtype=np.float64)
    out = {"n": int(arr.size)}
    out["mean"] = float(arr.mean()) if arr.size else None
    out["sem"] = (
        float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size >= 2 else None
    )
    return out


# ---------------------------------------------------------------------------
# cell execution


def _run_cell(payload: dict) -> dict:
    """Train one cell and measure what the experiment asked for."""
    spec: TaskSpec = payload["spec"]
    tconf: TrainConfig = payload["train"]
    measure: dict = payload["measure"]
    record = dict(payload["meta"])
    record["seed"] = tconf.seed
    dataset = make_dataset(spec)
    try:
        result = train(spec, tconf, dataset)
    except TrainingDivergedError as exc:
        record["status"] = f"diverged@epoch{exc.epoch}"
        record["_extras"] = {}
        return record
    record["status"] = "ok"
    n_epochs = result.train_mse.size
    record["final_train_mse"] = (
        float(result.train_mse[-1]) if n_epochs else result.init_train_mse
    )
    record["final_val_mse"] = (
        float(result.val_mse[-1]) if n_epochs else result.init_val_mse
    )
    record["init_val_mse"] = result.init_val_mse
    record["test_mse"] = result.test_mse

    extras: dict = {}
    graph = assemble(result.params)
    horizon = spec.seq_len
    if measure.get("correlations"):
        opt = optimal_map(spec)
        r_io = resolvent_io(
            graph, alpha=tconf.alpha, k_min=2, k_max=horizon + 1, normalized=True
        )
        whh_walk = result.params.w_hh.T.copy()
        record["pearson_resolvent"] = pearson(r_io.values, opt.values)
        record["pearson_whh"] = pearson(whh_walk, opt.values)
        extras["r_io"] = r_io.values
        extras["whh_walk"] = whh_walk
    hop_ks = measure.get("hops")
    if hop_ks:
        norm_graph = normalize(graph)
        hop_maps = {}
        for k in hop_ks:
            io = hop_io(norm_graph, k)
            hop_maps[int(k)] = io.values
            record[f"contrast_k{k}"] = block_contrast(
                io, spec.modules, spec.features_per_module
            )
        extras["hop_maps"] = hop_maps
    if measure.get("sparsity_stats"):
        record["l1_whh"] = l1_whh_value(result.params)
        record["resolvent_raw"] = resolvent_penalty_value(
            result.params, alpha=tconf.alpha, horizon=horizon
        )
        profile = hop_magnitude_profile(
            graph, alpha=tconf.alpha, k_min=1, k_max=horizon + 1, normalized=False
        )
        for k, magnitude in profile:
            record[f"hop_mag_k{k}"] = magnitude
    if measure.get("curves"):
        extras["curves"] = (result.train_mse, result.val_mse, result.sparsity)
    if measure.get("keep_params"):
        extras["params"] = result.params
        extras["init_train_mse"] = result.init_train_mse
    record["_extras"] = extras
    return record


def _execute(payloads: list, jobs: int) -> list:
    """Run cells inline or on a spawn pool; order follows submission."""
    if jobs <= 1 or len(payloads) <= 1:
        return [_run_cell(p) for p in payloads]
    ctx = get_context("spawn")
    with ctx.Pool(processes=min(int(jobs), len(payloads))) as pool:
        return pool.map(_run_cell, payloads, chunksize=1)


def _warn_excluded(experiment: str, records: list) -> list:
    excluded = []
    for rec in records:
        if rec["status"] != "ok":
            label = ", ".join(
                f"{key}={rec[key]}"
                for key in ("task", "family", "beta", "repeat")
                if key in rec
            )
            warnings.warn(
                f"{experiment}: run ({label}) {rec['status']}; "
                "excluded from aggregates",
                stacklevel=2,
            )
            excluded.append(label + f" {rec['status']}")
    return excluded


def _ok(records, **keys):
    out = []
    for rec in records:
        if rec["status"] != "ok":
            continue
        if all(rec.get(k) == v for k, v in keys.items()):
            out.append(rec)
    return out


# ---------------------------------------------------------------------------
# artifact writing


class ArtifactWriter:
    """Writes the output bundle of one experiment and tracks the manifest."""

    def __init__(self, out_dir, experiment: str):
        self.out_dir = Path(out_dir)
        self.experiment = experiment
        self.entries: list = []
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def note(self, rel: str, kind: str, description: str, **extra) -> None:
        entry = {"path": rel, "kind": kind, "description": description}
        entry.update(extra)
        self.entries.append(entry)

    def matrix(self, rel: str, values, meta: dict, description: str, axes=None) -> None:
        path = self.out_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        save_matrix_csv(path, values, meta)
        self.note(
            rel,
            "matrix",
            description,
            axes=axes or {"rows": "input feature", "cols": "output feature"},
        )

    def table(self, rel: str, columns, rows, description: str) -> None:
        path = self.out_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        save_table_csv(path, list(columns), rows)
        self.note(rel, "table", description, columns=list(columns))

    def curves(self, rel: str, curve_arrays, description: str) -> None:
        train_curve, val_curve, sparsity_curve = curve_arrays
        rows = [
            [epoch, train_curve[epoch], val_curve[epoch], sparsity_curve[epoch]]
            for epoch in range(len(train_curve))
        ]
        self.table(rel, CURVE_COLUMNS, rows, description)

    def records(self, columns, records, description: str) -> None:
        rows = [[rec.get(col, "") for col in columns] for rec in records]
        self.table("runs/records.csv", columns, rows, description)

    def report(self, report: dict) -> None:
        path = self.out_dir / "report.json"
        path.write_text(
            json.dumps(
                report, indent=2, sort_keys=True, allow_nan=False, default=_json_default
            )
            + "\n"
        )
        self.note("report.json", "json", "aggregate statistics")

    def manifest(self) -> None:
        payload = {"experiment": self.experiment, "artifacts": self.entries}
        (self.out_dir / "manifest.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n"
        )


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__} to JSON")


def _mean_matrix(records, key) -> np.ndarray | None:
    stacks = [rec["_extras"][key] for rec in records if key in rec["_extras"]]
    if not stacks:
        return None
    return np.mean(stacks, axis=0)


def _curve_rel(meta: dict) -> str:
    parts = ["curve", str(meta["task"])]
    if "family" in meta:
        parts.append(str(meta["family"]))
    if "beta_index" in meta:
        parts.append(f"b{meta['beta_index']}")
    parts.append(f"r{meta['repeat']}")
    return "runs/" + "_".join(parts) + ".csv"


# ---------------------------------------------------------------------------
# fig3: correlation of graph measures with the analytic optimal maps


def run_fig3(config: ExperimentConfig, out_dir) -> AggregateReport:
    """Train repeats on the four mappable tasks and correlate measures."""
    if config.repeats < 2:
        raise ConfigError("repeats: fig3 aggregation needs at least 2 repeats")
    started = time.perf_counter()
    payloads = []
    for kind in FIG3_TASKS:
        spec = config.task_spec(kind)
        if kind is TaskKind.MULTIPLICATION:
            overrides = {"beta": 0.0, "reg": "none"}
        else:
            overrides = {}
        for repeat in range(config.repeats):
            seed = config.run_seed(TASK_ORDER.index(kind), repeat)
            payloads.append(
                {
                    "spec": spec,
                    "train": config.train_config(seed=seed, **overrides),
                    "meta": {"task": kind.value, "repeat": repeat},
                    "measure": {"correlations": True, "curves": True},
                }
            )
    records = _execute(payloads, config.jobs)
    excluded = _warn_excluded("fig3", records)

    writer = ArtifactWriter(out_dir, "fig3")
    tasks_report: dict = {}
    for kind in FIG3_TASKS:
        spec = config.task_spec(kind)
        ok = _ok(records, task=kind.value)
        opt = optimal_map(spec)
        entry = {
            "pearson_resolvent": summarize(r["pearson_resolvent"] for r in ok),
            "pearson_whh": summarize(r["pearson_whh"] for r in ok),
            "test_mse": summarize(r["test_mse"] for r in ok),
            "oracle_self_pearson": pearson(opt.values, opt.values),
            "excluded": config.repeats - len(ok),
        }
        # The headline statistic correlates the mean map across runs with the
        # optimal map; per-run routing that varies between seeds averages out,
        # leaving the structure every run shares. Per-run means stay reported
        # above for completeness.
        mean_r = _mean_matrix(ok, "r_io")
        mean_w = _mean_matrix(ok, "whh_walk")
        entry["pearson_resolvent_mean_map"] = (
            pearson(mean_r, opt.values) if mean_r is not None else None
        )
        entry["pearson_whh_mean_map"] = (
            pearson(mean_w, opt.values) if mean_w is not None else None
        )
        if spec.kind in LINEAR_KINDS:
            dataset = make_dataset(spec)
            x_test, y_test = dataset.subset("test")
            entry["oracle_test_mse"] = mse(ridge_predict(spec, x_test), y_test)
        else:
            entry["oracle_test_mse"] = None
        tasks_report[kind.value] = entry

        save_optimal_map(opt, writer.out_dir / "maps" / f"optimal_{kind.value}.csv")
        writer.note(
            f"maps/optimal_{kind.value}.csv",
            "matrix",
            f"analytic optimal input-output map for {kind.value}",
            axes={"rows": "input feature", "cols": "output feature"},
        )
        for key, label in (("r_io", "resolvent_io"), ("whh_walk", "whh")):
            mean = _mean_matrix(ok, key)
            if mean is not None:
                writer.matrix(
                    f"maps/{label}_mean_{kind.value}.csv",
                    mean,
                    {"kind": f"mean:{label}", "task": kind.value, "runs": len(ok)},
                    f"mean {label} map across {len(ok)} runs of {kind.value}",
                )
        for rec in ok:
            writer.curves(
                _curve_rel(rec),
                rec["_extras"]["curves"],
                f"loss curves for {kind.value} repeat {rec['repeat']}",
            )

    columns = [
        "task",
        "repeat",
        "seed",
        "status",
        "final_train_mse",
        "final_val_mse",
        "init_val_mse",
        "test_mse",
        "pearson_resolvent",
        "pearson_whh",
    ]
    writer.records(columns, records, "per-run correlation records")
    report = {
        "experiment": "fig3",
        "seed": config.seed,
        "repeats": config.repeats,
        "epochs": config.epochs,
        "lr": config.lr,
        "beta": config.beta,
        "reg": config.reg,
        "alpha": config.alpha,
        "elapsed_seconds": round(time.perf_counter() - started, 3),
        "excluded_runs": excluded,
        "tasks": tasks_report,
    }
    writer.report(report)
    writer.manifest()
    return AggregateReport("fig3", report, columns, records)


# ---------------------------------------------------------------------------
# fig4: hop-power routing analysis on the on-off task


FIG4_HOPS = (2, 3, 4, 5, 6)


def run_fig4(config: ExperimentConfig, out_dir) -> AggregateReport:
    """Hop-power block structure of networks trained on the on-off task."""
    if config.task_kind() is not TaskKind.ON_OFF_AVERAGING:
        raise ConfigError(
            f"task: the routing analysis is defined on on_off_averaging, "
            f"got {config.task!r}"
        )
    started = time.perf_counter()
    spec = config.task_spec()
    hop_ks = tuple(k for k in range(2, spec.seq_len + 2))
    payloads = []
    for repeat in range(config.repeats):
        seed = config.run_seed(TASK_ORDER.index(spec.kind), repeat)
        payloads.append(
            {
                "spec": spec,
                "train": config.train_config(seed=seed),
                "meta": {"task": spec.kind.value, "repeat": repeat},
                "measure": {"hops": hop_ks, "curves": True},
            }
        )
    records = _execute(payloads, config.jobs)
    excluded = _warn_excluded("fig4", records)
    ok = _ok(records)

    noise_steps = set(noise_timesteps(spec.seq_len))
    parity = []
    for k in hop_ks:
        arrival = spec.seq_len - (k - 2)          # 1-based arrival timestep
        parity.append(
            {
                "k": k,
                "arrival_timestep": arrival,
                "carries_signal": (arrival - 1) not in noise_steps,
            }
        )
    even_ks = [k for k in hop_ks if k % 2 == 0]
    odd_ks = [k for k in hop_ks if k % 2 == 1]
    for rec in ok:
        rec["even_over_odd"] = bool(
            min(rec[f"contrast_k{k}"] for k in even_ks)
            > max(rec[f"contrast_k{k}"] for k in odd_ks)
        )

    writer = ArtifactWriter(out_dir, "fig4")
    hop_stacks = {k: [] for k in hop_ks}
    for rec in ok:
        for k, values in rec["_extras"]["hop_maps"].items():
            hop_stacks[k].append(values)
    for k in hop_ks:
        if hop_stacks[k]:
            writer.matrix(
                f"maps/hop_k{k}_mean.csv",
                np.mean(hop_stacks[k], axis=0),
                {"kind": f"mean:hop:{k}", "task": spec.kind.value, "runs": len(ok)},
                f"mean normalised hop-{k} input-output map across {len(ok)} runs",
            )
    for rec in ok:
        writer.curves(
            _curve_rel(rec),
            rec["_extras"]["curves"],
            f"loss curves for repeat {rec['repeat']}",
        )

    columns = (
        ["task", "repeat", "seed", "status", "final_train_mse", "final_val_mse",
         "init_val_mse", "test_mse"]
        + [f"contrast_k{k}" for k in hop_ks]
        + ["even_over_odd"]
    )
    writer.records(columns, records, "per-run hop block-contrast records")
    report = {
        "experiment": "fig4",
        "task": spec.kind.value,
        "seed": config.seed,
        "repeats": config.repeats,
        "epochs": config.epochs,
        "beta": config.beta,
        "reg": config.reg,
        "alpha": config.alpha,
        "elapsed_seconds": round(time.perf_counter() - started, 3),
        "excluded_runs": excluded,
        "parity": parity,
        "contrast": {
            str(k): summarize(rec[f"contrast_k{k}"] for rec in ok) for k in hop_ks
        },
        "even_over_odd_runs": int(sum(rec["even_over_odd"] for rec in ok)),
        "ok_runs": len(ok),
    }
    writer.report(report)
    writer.manifest()
    return AggregateReport("fig4", report, columns, records)


# ---------------------------------------------------------------------------
# fig5: sparsity sweep comparing the two penalty families


def run_fig5(config: ExperimentConfig, out_dir) -> AggregateReport:
    """Beta sweep of both penalty families on the two averaging tasks."""
    started = time.perf_counter()
    betas = config.beta_grid()
    payloads = []
    for kind in FIG5_TASKS:
        spec = config.task_spec(kind)
        task_index = TASK_ORDER.index(kind)
        for family in FIG5_FAMILIES:
            for beta_index, beta in enumerate(betas):
                for repeat in range(config.repeats):
                    seed = config.run_seed(task_index, beta_index, repeat)
                    payloads.append(
                        {
                            "spec": spec,
                            "train": config.train_config(
                                seed=seed, beta=float(beta), reg=family
                            ),
                            "meta": {
                                "task": kind.value,
                                "family": family,
                                "beta_index": beta_index,
                                "beta": float(beta),
                                "repeat": repeat,
                            },
                            "measure": {"sparsity_stats": True, "curves": True},
                        }
                    )
            if config.include_beta_zero:
                for repeat in range(config.repeats):
                    seed = config.run_seed(task_index, -1, repeat)
                    payloads.append(
                        {
                            "spec": spec,
                            "train": config.train_config(
                                seed=seed, beta=0.0, reg=family
                            ),
                            "meta": {
                                "task": kind.value,
                                "family": family,
                                "beta_index": -1,
                                "beta": 0.0,
                                "repeat": repeat,
                            },
                            "measure": {"sparsity_stats": True, "curves": True},
                        }
                    )
    records = _execute(payloads, config.jobs)
    excluded = _warn_excluded("fig5", records)

    hop_ks = tuple(range(1, config.seq_len + 2))
    writer = ArtifactWriter(out_dir, "fig5")
    tasks_report: dict = {}
    for kind in FIG5_TASKS:
        per_family: dict = {}
        for family in FIG5_FAMILIES:
            grid = []
            for beta_index, beta in enumerate(betas):
                cell = _ok(
                    records, task=kind.value, family=family, beta_index=beta_index
                )
                grid.append(
                    {
                        "beta": float(beta),
                        "test_mse": summarize(r["test_mse"] for r in cell),
                        "final_val_mse": summarize(r["final_val_mse"] for r in cell),
                        "l1_whh": summarize(r["l1_whh"] for r in cell),
                        "resolvent_raw": summarize(r["resolvent_raw"] for r in cell),
                        "excluded": config.repeats - len(cell),
                    }
                )
            val_means = [
                cell["final_val_mse"]["mean"]
                if cell["final_val_mse"]["mean"] is not None
                else np.inf
                for cell in grid
            ]
            selected = int(np.argmin(val_means))
            family_ok = [
                r
                for r in _ok(records, task=kind.value, family=family)
                if r["beta_index"] >= 0
            ]
            best = min(
                family_ok, key=lambda r: r["final_val_mse"], default=None
            )
            best_entry = None
            if best is not None:
                best_entry = {
                    "beta": best["beta"],
                    "beta_index": best["beta_index"],
                    "repeat": best["repeat"],
                    "final_val_mse": best["final_val_mse"],
                    "test_mse": best["test_mse"],
                    "hop_profile": {
                        str(k): best[f"hop_mag_k{k}"] for k in hop_ks
                    },
                }
                writer.curves(
                    f"runs/curve_best_{kind.value}_{family}.csv",
                    best["_extras"]["curves"],
                    f"loss curves of the best {family} run on {kind.value}",
                )
            selected_mean = grid[selected]["test_mse"]["mean"]
            max_beta_mean = grid[-1]["test_mse"]["mean"]
            degradation = None
            if selected_mean is not None and max_beta_mean is not None and selected_mean > 0:
                degradation = max_beta_mean / selected_mean
            per_family[family] = {
                "grid": grid,
                "selected_beta_index": selected,
                "selected_beta": float(betas[selected]),
                "selected_test_mse": grid[selected]["test_mse"],
                "selected_val_mse": grid[selected]["final_val_mse"],
                "degradation_at_max_beta": degradation,
                "best_run": best_entry,
            }
        entry: dict = dict(per_family)
        if config.include_beta_zero:
            zero_l1 = _ok(records, task=kind.value, family="l1_whh", beta_index=-1)
            zero_res = _ok(
                records, task=kind.value, family="resolvent_io", beta_index=-1
            )
            pairs = {r["repeat"]: r for r in zero_l1}
            matches = [
                pairs[r["repeat"]]["test_mse"] == r["test_mse"]
                and pairs[r["repeat"]]["final_val_mse"] == r["final_val_mse"]
                for r in zero_res
                if r["repeat"] in pairs
            ]
            entry["beta_zero"] = {
                "test_mse": summarize(r["test_mse"] for r in zero_l1),
                "families_match": bool(matches) and all(matches),
            }
        tasks_report[kind.value] = entry

    comparison = {}
    for kind in FIG5_TASKS:
        fam = tasks_report[kind.value]
        l1 = fam["l1_whh"]
        rr = fam["resolvent_io"]
        comp = {
            "resolvent_best_leq_l1": (
                rr["selected_test_mse"]["mean"] is not None
                and l1["selected_test_mse"]["mean"] is not None
                and rr["selected_test_mse"]["mean"] <= l1["selected_test_mse"]["mean"]
            ),
            "degradation_l1": l1["degradation_at_max_beta"],
            "degradation_resolvent": rr["degradation_at_max_beta"],
        }
        if kind is TaskKind.ON_OFF_AVERAGING:
            if l1["best_run"] and rr["best_run"]:
                comp["hops_suppressed_even"] = all(
                    rr["best_run"]["hop_profile"][str(k)]
                    < l1["best_run"]["hop_profile"][str(k)]
                    for k in (2, 4, 6)
                    if str(k) in rr["best_run"]["hop_profile"]
                )
            else:
                comp["hops_suppressed_even"] = None
        comparison[kind.value] = comp

    columns = (
        ["task", "family", "beta_index", "beta", "repeat", "seed", "status",
         "final_train_mse", "final_val_mse", "init_val_mse", "test_mse",
         "l1_whh", "resolvent_raw"]
        + [f"hop_mag_k{k}" for k in hop_ks]
    )
    writer.records(columns, records, "per-run sweep records")
    report = {
        "experiment": "fig5",
        "seed": config.seed,
        "repeats": config.repeats,
        "epochs": config.epochs,
        "lr": config.lr,
        "alpha": config.alpha,
        "beta_grid": [float(b) for b in betas],
        "include_beta_zero": config.include_beta_zero,
        "elapsed_seconds": round(time.perf_counter() - started, 3),
        "excluded_runs": excluded,
        "tasks": tasks_report,
        "comparison": comparison,
    }
    writer.report(report)
    writer.manifest()
    return AggregateReport("fig5", report, columns, records)


# ---------------------------------------------------------------------------
# single run, analysis, and dataset generation


def run_single(config: ExperimentConfig, out_dir) -> AggregateReport:
    """One training run with the full analysis bundle."""
    started = time.perf_counter()
    spec = config.task_spec()
    tconf = config.train_config(seed=config.run_seed(0))
    payload = {
        "spec": spec,
        "train": tconf,
        "meta": {"task": spec.kind.value, "repeat": 0},
        "measure": {
            "curves": True,
            "sparsity_stats": True,
            "correlations": has_optimal_map(spec.kind),
            "hops": tuple(range(2, spec.seq_len + 2)),
            "keep_params": True,
        },
    }
    record = _run_cell(payload)
    if record["status"] != "ok":
        raise TrainingDivergedError(
            f"single run {record['status']}", epoch=-1, loss=float("nan")
        )
    extras = record["_extras"]
    writer = ArtifactWriter(out_dir, "single")
    save_checkpoint(extras["params"], writer.out_dir / "checkpoint.csv", tconf)
    writer.note("checkpoint.csv", "checkpoint", "trained parameter arrays")
    writer.curves("runs/curve_single.csv", extras["curves"], "loss curves")
    hop_ks = sorted(extras["hop_maps"])
    for k in hop_ks:
        writer.matrix(
            f"maps/hop_k{k}.csv",
            extras["hop_maps"][k],
            {"kind": f"hop:{k}", "task": spec.kind.value},
            f"normalised hop-{k} input-output map",
        )
    if "r_io" in extras:
        writer.matrix(
            "maps/resolvent_io.csv",
            extras["r_io"],
            {"kind": "resolvent_io", "task": spec.kind.value},
            "truncated walk-series input-output map (normalised graph)",
        )
        opt = optimal_map(spec)
        save_optimal_map(opt, writer.out_dir / "maps" / "optimal.csv")
        writer.note(
            "maps/optimal.csv", "matrix", "analytic optimal input-output map"
        )
    columns = [
        "task", "repeat", "seed", "status", "final_train_mse", "final_val_mse",
        "init_val_mse", "test_mse", "l1_whh", "resolvent_raw",
    ] + [f"hop_mag_k{k}" for k in range(1, spec.seq_len + 2)]
    if "pearson_resolvent" in record:
        columns += ["pearson_resolvent", "pearson_whh"]
    writer.records(columns, [record], "single-run record")
    report = {
        "experiment": "single",
        "config": asdict(config),
        "elapsed_seconds": round(time.perf_counter() - started, 3),
        "metrics": {col: record.get(col) for col in columns if col != "status"},
        "contrasts": {
            str(k): record.get(f"contrast_k{k}") for k in hop_ks
        },
    }
    writer.report(report)
    writer.manifest()
    return AggregateReport("single", report, columns, [record])


def run_analysis(config: ExperimentConfig, out_dir) -> AggregateReport:
    """Graph-measure bundle for an existing checkpoint, no training."""
    if not config.checkpoint:
        raise ConfigError("checkpoint: required for analysis (path to a checkpoint)")
    started = time.perf_counter()
    params, header = load_checkpoint(config.checkpoint)
    spec = config.task_spec()
    graph = assemble(params)
    norm_graph = normalize(graph)
    writer = ArtifactWriter(out_dir, "analyze")

    hop_ks = tuple(range(2, spec.seq_len + 2))
    contrasts = {}
    for k in hop_ks:
        io = hop_io(norm_graph, k)
        contrasts[str(k)] = block_contrast(io, spec.modules, spec.features_per_module)
        writer.matrix(
            f"maps/hop_k{k}.csv",
            io.values,
            {"kind": f"hop:{k}", "task": spec.kind.value},
            f"normalised hop-{k} input-output map",
        )
    r_io = resolvent_io(
        graph, alpha=config.alpha, k_min=2, k_max=spec.seq_len + 1, normalized=True
    )
    writer.matrix(
        "maps/resolvent_io.csv",
        r_io.values,
        {"kind": r_io.kind, "task": spec.kind.value},
        "truncated walk-series input-output map (normalised graph)",
    )
    comm = communicability_io(graph, terms=30)
    writer.matrix(
        "maps/communicability_io.csv",
        comm.values,
        {"kind": comm.kind, "task": spec.kind.value},
        "exponential-series input-output map",
    )
    report = {
        "experiment": "analyze",
        "checkpoint": str(config.checkpoint),
        "checkpoint_header": header,
        "task": spec.kind.value,
        "alpha": config.alpha,
        "contrasts": contrasts,
        "sparsity": {
            "l1_whh": l1_whh_value(params),
            "resolvent_raw": resolvent_penalty_value(
                params, alpha=config.alpha, horizon=spec.seq_len
            ),
        },
        "hop_profile": {
            str(k): mag
            for k, mag in hop_magnitude_profile(
                graph, alpha=config.alpha, k_min=1, k_max=spec.seq_len + 1,
                normalized=False,
            )
        },
        "elapsed_seconds": round(time.perf_counter() - started, 3),
    }
    if has_optimal_map(spec.kind):
        opt = optimal_map(spec)
        report["pearson_resolvent"] = pearson(r_io.values, opt.values)
        report["pearson_whh"] = pearson(params.w_hh.T, opt.values)
        save_optimal_map(opt, writer.out_dir / "maps" / "optimal.csv")
        writer.note(
            "maps/optimal.csv", "matrix", "analytic optimal input-output map"
        )
    writer.report(report)
    writer.manifest()
    return AggregateReport("analyze", report, [], [])


def run_gen(config: ExperimentConfig, out_dir) -> AggregateReport:
    """Generate and export one task dataset as a CSV bundle."""
    started = time.perf_counter()
    spec = config.task_spec()
    dataset = make_dataset(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_dataset(dataset, spec, out)
    sizes = {
        name: int(idx.size)
        for name, idx in zip(("train", "val", "test"), dataset.split_indices)
    }
    report = {
        "experiment": "gen",
        "task": spec.kind.value,
        "samples": spec.samples,
        "seq_len": spec.seq_len,
        "features": spec.f_all,
        "split_sizes": sizes,
        "data_seed": spec.seed,
        "elapsed_seconds": round(time.perf_counter() - started, 3),
    }
    writer = ArtifactWriter(out, "gen")
    for rel, description in (
        ("meta.json", "task parameters"),
        ("inputs.csv", "input sequences, sample-major"),
        ("targets.csv", "per-sample target features"),
        ("splits.csv", "train/val/test row indices"),
    ):
        writer.note(rel, "dataset", description)
    writer.report(report)
    writer.manifest()
    return AggregateReport("gen", report, [], [])


RUNNERS = {
    "fig3": run_fig3,
    "fig4": run_fig4,
    "fig5": run_fig5,
    "single": run_single,
    "analyze": run_analysis,
    "gen": run_gen,
}
