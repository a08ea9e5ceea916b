"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 computation error,
3 I/O error.
"""
from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import __version__
from .baseline import similarity_report, write_similarity_csv
from .correlation import rho_matrix_grid, to_distance, triangle_audit, write_matrix_csv
from .fluctuation import FluctuationEngine
from .panel import read_price_csv, read_series_csv, write_series_csv
from .pipeline import parse_config, parse_transform, run_pipeline
from .significance import filter_tree, read_threshold_csv, surrogate_thresholds, write_threshold_csv
from .synthetic import ArfimaParams, CorrelatedPairParams, arfima_panel, correlated_pair_panel
from .transforms import apply_transform, log_returns
from .tree import kruskal, metrics, read_node_attributes, to_dot, to_graphml, to_json_report

EXIT_VALIDATION = 1
EXIT_COMPUTATION = 2
EXIT_IO = 3


def exit_codes(fn):
    """Map exception classes onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (OSError, json.JSONDecodeError) as exc:
            click.echo(f"i/o error: {exc}", err=True)
            sys.exit(EXIT_IO)
        except ValueError as exc:
            click.echo(f"invalid input: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except (ArithmeticError, RuntimeError) as exc:
            click.echo(f"computation failed: {exc}", err=True)
            sys.exit(EXIT_COMPUTATION)

    return wrapper


@click.group()
@click.version_option(__version__)
def main():
    """q-dependent detrended correlation networks and spanning trees."""


@main.command()
@click.option("--kind", type=click.Choice(["arfima", "pairs"]), default="arfima")
@click.option("-n", "--count", type=int, default=10, help="Series (arfima) or pair count.")
@click.option("-T", "--length", type=int, required=True)
@click.option("-d", "--memory", type=float, default=0.3, help="Fractional differencing d.")
@click.option("--truncation", type=int, default=10_000)
@click.option("--gamma", type=float, default=0.6, help="Pair coupling in [0,1].")
@click.option("--seed", type=int, default=0)
@click.option("-o", "--output", type=click.Path(), required=True)
@exit_codes
def synth(kind, count, length, memory, truncation, gamma, seed, output):
    """Generate a synthetic panel CSV."""
    if kind == "arfima":
        panel = arfima_panel(count, ArfimaParams(memory, length, truncation, seed))
    else:
        panel = correlated_pair_panel(count, CorrelatedPairParams(gamma, length, seed))
    write_series_csv(output, panel)
    click.echo(f"wrote {panel.n_series} x {panel.length} panel to {output}")


@main.command()
@click.option("-i", "--input", "input_path", type=click.Path(exists=True), required=True)
@click.option("-o", "--output", type=click.Path(), required=True)
@click.option("--prices", is_flag=True, help="Input is a price panel; take log-returns first.")
@click.option("--dt", type=int, default=1, help="Return stride (with --prices).")
@click.option("--drop-gaps", is_flag=True, help="Drop returns spanning timestamp gaps.")
@click.option("--op", "ops", multiple=True,
              help="Transform chain entry: kind[:threshold_sigma[:signed]].")
@click.option("--seed", type=int, default=0)
@exit_codes
def transform(input_path, output, prices, dt, drop_gaps, ops, seed):
    """Apply log-returns and/or a transform chain to a panel."""
    if prices:
        panel = log_returns(read_price_csv(input_path), dt, drop_gaps=drop_gaps)
    else:
        panel = read_series_csv(input_path)
    for k, op in enumerate(ops):
        panel = apply_transform(panel, parse_transform(op, seed=seed + 1000 + k))
    write_series_csv(output, panel)
    click.echo(f"wrote transformed panel to {output}")


def _scale_q_options(fn):
    fn = click.option("-s", "--scale", type=int, required=True)(fn)
    fn = click.option("-q", "--q-value", "q_values", type=float, multiple=True, required=True)(fn)
    fn = click.option("-m", "--order", type=int, default=2)(fn)
    return fn


@main.command()
@click.option("-i", "--input", "input_path", type=click.Path(exists=True), required=True)
@_scale_q_options
@click.option("-o", "--output-prefix", type=click.Path(), required=True)
@click.option("--distance/--no-distance", default=True, help="Also write distance matrices.")
@click.option("--dump-boxes", type=click.Path(), default=None,
              help="Debug CSV of per-box covariances (s, q-independent).")
@exit_codes
def rho(input_path, scale, q_values, order, output_prefix, distance, dump_boxes):
    """Compute rho_q and distance matrices for a panel."""
    panel = read_series_csv(input_path)
    engine = FluctuationEngine(panel.series, order)
    mats = rho_matrix_grid(panel, scale, list(q_values), order, engine=engine)
    for q, mat in sorted(mats.items()):
        path = f"{output_prefix}_rho_s{scale}_q{q:g}.csv"
        write_matrix_csv(path, mat.labels, mat.values)
        click.echo(f"wrote {path}")
        if distance:
            d = to_distance(mat)
            dpath = f"{output_prefix}_dist_s{scale}_q{q:g}.csv"
            write_matrix_csv(dpath, d.labels, d.values)
            click.echo(f"wrote {dpath}")
    if dump_boxes:
        with open(dump_boxes, "w", encoding="utf-8") as fh:
            fh.write("series_i,series_j,s,box,f2\n")
            n = panel.n_series
            for i in range(n):
                for j in range(i, n):
                    f2 = engine.pair_profile(i, j, scale)
                    for nu, v in enumerate(f2):
                        fh.write(f"{i},{j},{scale},{nu},{v:.12g}\n")
        click.echo(f"wrote {dump_boxes}")


@main.command()
@click.option("-i", "--input", "input_path", type=click.Path(exists=True), required=True)
@_scale_q_options
@click.option("-o", "--output-prefix", type=click.Path(), required=True)
@click.option("--tau", type=float, default=None, help="Significance threshold for filtering.")
@click.option("--thresholds-file", type=click.Path(exists=True), default=None)
@click.option("--attrs", type=click.Path(exists=True), default=None,
              help="Node attributes CSV (label,sector,capitalization) for DOT output.")
@exit_codes
def tree(input_path, scale, q_values, order, output_prefix, tau, thresholds_file, attrs):
    """Build (and optionally filter) q-dependent minimum spanning trees."""
    panel = read_series_csv(input_path)
    table = read_threshold_csv(thresholds_file) if thresholds_file else None
    node_attrs = read_node_attributes(attrs) if attrs else None
    mats = rho_matrix_grid(panel, scale, list(q_values), order)
    for q, mat in sorted(mats.items()):
        full = kruskal(to_distance(mat), mat)
        out = full
        cell_tau = tau
        if cell_tau is None and table is not None:
            cell_tau = table.tau(scale, q)
        if cell_tau is not None:
            out = filter_tree(full, mat, cell_tau)
        base = f"{output_prefix}_tree_s{scale}_q{q:g}"
        Path(f"{base}.json").write_text(to_json_report(out, {"tau": cell_tau}))
        Path(f"{base}.dot").write_text(to_dot(out, node_attrs))
        Path(f"{base}.graphml").write_text(to_graphml(out))
        m = metrics(out)
        click.echo(
            f"s={scale} q={q:g}: {len(out.labels)} nodes, {len(out.edges)} edges, "
            f"max k={m.max_degree} ({m.max_degree_node}), L={m.avg_path_length:.3g}"
        )


@main.command()
@click.option("-i", "--input", "input_path", type=click.Path(exists=True), required=True)
@_scale_q_options
@exit_codes
def audit(input_path, scale, q_values, order):
    """Triangle-inequality audit of the q-distance matrices.

    Accepts negative q (out-of-range coefficients are folded by 1/rho).
    """
    panel = read_series_csv(input_path)
    engine = FluctuationEngine(panel.series, order)
    mats = rho_matrix_grid(panel, scale, list(q_values), order,
                           engine=engine, audit_mode=True)
    click.echo("s,q,triples,violations,worst_slack")
    for q, mat in sorted(mats.items()):
        report = triangle_audit(to_distance(mat))
        click.echo(
            f"{scale},{q:g},{report.triples_checked},{report.violations},"
            f"{report.worst_slack:.6g}"
        )


@main.command()
@click.option("-i", "--input", "input_path", type=click.Path(exists=True), required=True)
@click.option("-s", "--scale", "scales", type=int, multiple=True, required=True)
@click.option("-q", "--q-value", "q_values", type=float, multiple=True, required=True)
@click.option("--n-sets", type=int, default=50)
@click.option("--seed", type=int, default=0)
@click.option("-o", "--output", type=click.Path(), required=True)
@exit_codes
def thresholds(input_path, scales, q_values, n_sets, seed, output):
    """Estimate surrogate significance thresholds tau_rho per (s, q)."""
    panel = read_series_csv(input_path)
    table = surrogate_thresholds(panel, list(scales), list(q_values), n_sets, seed)
    write_threshold_csv(output, table)
    click.echo(f"wrote {output}")


@main.command()
@click.option("-i", "--input", "input_path", type=click.Path(exists=True), required=True)
@click.option("--dt", "dts", type=int, multiple=True, default=(1,))
@click.option("-s", "--scale", "scales", type=int, multiple=True, required=True)
@click.option("-q", "--q-value", "q_values", type=float, multiple=True, required=True)
@click.option("-m", "--order", type=int, default=2)
@click.option("-o", "--output", type=click.Path(), required=True)
@exit_codes
def compare(input_path, dts, scales, q_values, order, output):
    """Normalized scalar product between Pearson and rho_q structures."""
    panel = read_series_csv(input_path)
    report = similarity_report(panel, list(dts), list(scales), list(q_values), order)
    write_similarity_csv(output, report)
    click.echo(f"wrote {output}")


@main.command("tree-compare")
@click.argument("tree_a", type=click.Path(exists=True))
@click.argument("tree_b", type=click.Path(exists=True))
@exit_codes
def tree_compare(tree_a, tree_b):
    """Count edges common to two tree JSON reports."""
    def _pairs(path):
        doc = json.loads(Path(path).read_text())
        return {tuple(sorted((e["a"], e["b"]))) for e in doc["edges"]}

    ea, eb = _pairs(tree_a), _pairs(tree_b)
    common = len(ea & eb)
    union = len(ea | eb)
    click.echo(f"common_edges={common} jaccard={common / union if union else 0.0:.6g}")


@main.command()
@click.option("-c", "--config", "config_path", type=click.Path(exists=True), required=True)
@exit_codes
def run(config_path):
    """Run the full pipeline described by a key=value config file."""
    config = parse_config(Path(config_path).read_text())
    manifest = run_pipeline(config)
    click.echo(f"manifest: {manifest}")


if __name__ == "__main__":
    main()
