"""End-to-end orchestration: config parsing, the (scale, q) grid run,
and the reproducibility manifest."""
from __future__ import annotations

import concurrent.futures
import hashlib
import json
import os
import traceback
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .correlation import rho_matrix_grid, to_distance, write_matrix_csv
from .fluctuation import FluctuationEngine
from .panel import SeriesPanel, read_price_csv, read_series_csv, write_series_csv
from .significance import (
    ThresholdTable,
    filter_tree,
    surrogate_thresholds,
    write_threshold_csv,
)
from .transforms import AMP_MODES, TransformSpec, apply_transform, log_returns
from .tree import kruskal, to_dot, to_graphml, to_json_report

FORMATS = ("dot", "graphml", "json")


@dataclass(frozen=True)
class RunConfig:
    input: str
    input_kind: str = "returns"  # prices | returns
    transforms: tuple[str, ...] = ()
    scales: tuple[int, ...] = (20,)
    q_values: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    m: int = 2
    dt: int = 1
    drop_gaps: bool = False
    n_sets: int = 50
    seed: int = 0
    output_dir: str = "qmst-out"
    formats: tuple[str, ...] = FORMATS
    workers: int = 0  # 0 = available cores

    def validate(self):
        if self.input_kind not in ("prices", "returns"):
            raise ValueError(f"input_kind must be prices or returns, got {self.input_kind!r}")
        if not self.scales:
            raise ValueError("scales list is empty")
        if any(s < self.m + 2 for s in self.scales):
            raise ValueError(f"every scale must be >= m+2 = {self.m + 2}")
        if not self.q_values:
            raise ValueError("q list is empty")
        if any(q <= 0 for q in self.q_values):
            raise ValueError("pipeline q values must be positive (audit handles q <= 0)")
        if self.m < 0:
            raise ValueError("m must be non-negative")
        if self.dt < 1:
            raise ValueError("dt must be a positive integer")
        if self.n_sets < 2:
            raise ValueError("n_sets must be >= 2")
        unknown = set(self.formats) - set(FORMATS)
        if unknown:
            raise ValueError(f"unknown output formats: {sorted(unknown)}")
        for t in self.transforms:
            parse_transform(t, seed=0)  # syntax check
        return self

    # execution-environment knobs: they never affect results, so they are
    # kept out of the canonical form and the config hash
    _ENV_FIELDS = ("output_dir", "workers")

    def canonical(self) -> str:
        lines = []
        for key in sorted(self.__dataclass_fields__):
            if key in self._ENV_FIELDS:
                continue
            val = getattr(self, key)
            if isinstance(val, tuple):
                val = ",".join(str(v) for v in val)
            lines.append(f"{key}={val}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def parse_config(text: str) -> RunConfig:
    """Plain key=value format; '#' starts a comment, lists are comma-separated."""
    raw = {}
    for lineno, ln in enumerate(text.splitlines(), start=1):
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        if "=" not in ln:
            raise ValueError(f"config line {lineno}: expected key=value, got {ln!r}")
        key, val = ln.split("=", 1)
        raw[key.strip()] = val.strip()
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "input" not in raw:
        raise ValueError("config is missing required key 'input'")
    kwargs = {"input": raw["input"]}
    def _split(v):
        return tuple(x.strip() for x in v.split(",") if x.strip())
    if "input_kind" in raw:
        kwargs["input_kind"] = raw["input_kind"]
    if "transforms" in raw:
        kwargs["transforms"] = tuple(x.strip() for x in raw["transforms"].split(";") if x.strip())
    if "scales" in raw:
        kwargs["scales"] = tuple(int(x) for x in _split(raw["scales"]))
    if "q_values" in raw:
        kwargs["q_values"] = tuple(float(x) for x in _split(raw["q_values"]))
    for key in ("m", "dt", "n_sets", "seed", "workers"):
        if key in raw:
            kwargs[key] = int(raw[key])
    if "drop_gaps" in raw:
        try:
            kwargs["drop_gaps"] = _BOOL[raw["drop_gaps"].lower()]
        except KeyError:
            raise ValueError(f"drop_gaps: expected a boolean, got {raw['drop_gaps']!r}")
    if "output_dir" in raw:
        kwargs["output_dir"] = raw["output_dir"]
    if "formats" in raw:
        kwargs["formats"] = _split(raw["formats"])
    return RunConfig(**kwargs).validate()


def parse_transform(text: str, seed: int) -> TransformSpec:
    """Chain-entry syntax: kind[:threshold_sigma[:signed]]."""
    parts = text.split(":")
    kind = parts[0]
    threshold = float(parts[1]) if len(parts) > 1 and kind in AMP_MODES else None
    signed = len(parts) > 2 and _BOOL.get(parts[2].lower(), False)
    return TransformSpec(kind=kind, threshold_sigma=threshold, seed=seed, signed=signed)


def load_input(config: RunConfig) -> SeriesPanel:
    if config.input_kind == "prices":
        prices = read_price_csv(config.input)
        panel = log_returns(prices, config.dt, drop_gaps=config.drop_gaps)
    else:
        panel = read_series_csv(config.input)
    for k, text in enumerate(config.transforms):
        spec = parse_transform(text, seed=int(config.seed) + 1000 + k)
        panel = apply_transform(panel, spec)
    return panel


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _cell_name(s, q):
    return f"s{s}_q{q:g}"


def _run_scale(panel, config, thresholds, s, outdir):
    """Compute and write every artifact for one scale; one file owner per cell."""
    artifacts = []
    engine = FluctuationEngine(panel.series, config.m)
    mats = rho_matrix_grid(panel, s, list(config.q_values), config.m, engine=engine)
    provenance_base = {
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "version": __version__,
    }
    for q in config.q_values:
        cell = _cell_name(s, q)
        rho = mats[float(q)]
        dist = to_distance(rho)
        write_matrix_csv(outdir / f"rho_{cell}.csv", rho.labels, rho.values)
        write_matrix_csv(outdir / f"dist_{cell}.csv", dist.labels, dist.values)
        artifacts += [f"rho_{cell}.csv", f"dist_{cell}.csv"]
        full = kruskal(dist, rho)
        tau = thresholds.tau(s, float(q))
        filtered = filter_tree(full, rho, tau)
        provenance = dict(provenance_base, s=s, q=q, tau=tau)
        for tree, tag in ((full, "tree"), (filtered, "ftree")):
            base = f"{tag}_{cell}"
            if "json" in config.formats:
                (outdir / f"{base}.json").write_text(to_json_report(tree, provenance))
                artifacts.append(f"{base}.json")
            if "dot" in config.formats:
                (outdir / f"{base}.dot").write_text(to_dot(tree))
                artifacts.append(f"{base}.dot")
            if "graphml" in config.formats:
                (outdir / f"{base}.graphml").write_text(to_graphml(tree))
                artifacts.append(f"{base}.graphml")
    return artifacts


def run_pipeline(config: RunConfig) -> Path:
    """Execute the full grid and write a manifest; returns manifest path.

    Scales run in parallel; a failure in one scale is recorded in the
    manifest while the other scales complete.  Outputs are byte-stable
    for a fixed (input, config, seed) at any worker count.
    """
    config.validate()
    outdir = Path(os.environ.get("QMST_OUTPUT_DIR", config.output_dir))
    outdir.mkdir(parents=True, exist_ok=True)
    panel = load_input(config)
    write_series_csv(outdir / "panel.csv", panel)
    errors = {}
    # Thresholds per scale so that one bad scale (e.g. longer than the
    # panel) is recorded and skipped instead of aborting the whole run.
    # The surrogate sets depend only on (seed, set index), so per-scale
    # calls produce the same tau values as one combined call.
    entries = {}
    good_scales = []
    for s in config.scales:
        try:
            table = surrogate_thresholds(
                panel, [s], config.q_values, n_sets=config.n_sets, seed=config.seed
            )
        except Exception as exc:
            errors[str(s)] = f"{type(exc).__name__}: {exc}"
            traceback.print_exc()
        else:
            entries.update(table.entries)
            good_scales.append(s)
    thresholds = ThresholdTable(entries)
    write_threshold_csv(outdir / "thresholds.csv", thresholds)
    artifacts = ["panel.csv", "thresholds.csv"]
    workers = config.workers or os.cpu_count() or 1
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            s: pool.submit(_run_scale, panel, config, thresholds, s, outdir)
            for s in good_scales
        }
        for s in good_scales:  # deterministic fold order
            try:
                artifacts.extend(futures[s].result())
            except Exception as exc:
                errors[str(s)] = f"{type(exc).__name__}: {exc}"
                traceback.print_exc()
    manifest = {
        "config": config.canonical(),
        "config_hash": config.config_hash(),
        "version": __version__,
        "artifacts": {
            name: _sha256(outdir / name) for name in sorted(artifacts)
        },
        "errors": errors,
        "grid": [
            {"s": s, "q": q, "tau": thresholds.tau(s, float(q))}
            for s in good_scales
            for q in config.q_values
        ],
    }
    manifest_path = outdir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path
