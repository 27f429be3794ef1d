"""Run an experiment config and write ``series.csv``, ``summary.json`` and
``config.resolved.toml`` under ``<out>/<experiment>/<config hash>/``."""
from __future__ import annotations

import csv
import json
import os
import shutil
import tempfile
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

import numpy as np

from .. import __version__
from .config import ExperimentConfig
from .experiments import SPECS, MemberResult, member_task
from .registry import REGISTRY


def resolve_threads(threads: int | None) -> int:
    """``--threads``, else ``WHLAB_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("WHLAB_THREADS")
        if env:
            try:
                threads = int(env)
            except ValueError as exc:
                raise ValueError(f"WHLAB_THREADS must be an integer, got {env!r}") from exc
        else:
            threads = 1
    if threads < 1:
        raise ValueError("thread count must be >= 1")
    return threads


def compute(cfg: ExperimentConfig, threads: int = 1) -> tuple[list[MemberResult], dict]:
    """Run all members (in a process pool when ``threads > 1``) and summarise.

    Results are collected in member order, so the output never depends on
    completion order.
    """
    spec = SPECS[cfg.experiment]
    if spec.validate is not None:
        spec.validate(cfg)
    task = partial(member_task, cfg)
    idx = range(cfg.ensemble["count"])
    if threads > 1 and cfg.ensemble["count"] > 1:
        with ProcessPoolExecutor(max_workers=min(threads, cfg.ensemble["count"])) as pool:
            results = list(pool.map(task, idx))
    else:
        results = [task(k) for k in idx]
    return results, spec.summarize(cfg, results)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if np.isfinite(f) else None
    return v


def write_outputs(cfg: ExperimentConfig, results: list[MemberResult], summary: dict,
                  out_dir: str | Path) -> Path:
    """Write into a temporary sibling directory, then rename into place."""
    spec = SPECS[cfg.experiment]
    h = cfg.hash()
    parent = Path(out_dir) / cfg.experiment
    parent.mkdir(parents=True, exist_ok=True)
    final = parent / h
    tmp = Path(tempfile.mkdtemp(prefix=f".{h}-", dir=parent))
    try:
        rows = [r for m in results for r in m.rows]
        with open(tmp / "series.csv", "w", newline="") as fh:
            fh.write(f"# whlab {__version__} experiment={cfg.experiment} config_hash={h} "
                     f"master_seed={cfg.ensemble['master_seed']}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(spec.columns)
            for r in rows:
                if len(r) != len(spec.columns):
                    raise RuntimeError(f"row width {len(r)} does not match the schema")
                w.writerow([_fmt(x) for x in r])
        entry = REGISTRY[cfg.experiment]
        doc = {
            "experiment": cfg.experiment,
            "figure": entry.figure,
            "version": __version__,
            "config_hash": h,
            "master_seed": cfg.ensemble["master_seed"],
            "members": cfg.ensemble["count"],
            "rows": len(rows),
            "columns": list(spec.columns),
            "scale": {"reference_parameters": entry.reference,
                      "used_parameters": cfg.to_dict()["protocol"],
                      "note": "desk-scale substitute for the reference system size"},
            "results": summary,
        }
        (tmp / "summary.json").write_text(json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n")
        (tmp / "config.resolved.toml").write_text(cfg.to_toml())
        if final.exists():
            shutil.rmtree(final)
        tmp.rename(final)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return final


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path = "results",
                   threads: int | None = None) -> Path:
    results, summary = compute(cfg, resolve_threads(threads))
    return write_outputs(cfg, results, summary, out_dir)
