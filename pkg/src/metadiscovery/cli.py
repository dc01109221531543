"""Command-line entry point: ``metadisco {run,gridsearch,fixture,metrics,ingest}``."""
from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import harness
from .agents import AGENT_KINDS
from .discovery import Checkpoint
from .ingestion import (UnknownSpeciesError, UsageParseError, average_months, emit_usage_json,
                        emit_usage_table, read_usage, to_initial_stats)
from .metrics import naive_baseline, overlap
from .roster import RosterError, load_roster

USER_ERRORS = (harness.ScenarioError, RosterError, UsageParseError, UnknownSpeciesError,
               FileNotFoundError, KeyError, ValueError)


def _fail(exc: Exception):
    raise click.ClickException(str(exc.args[0]) if isinstance(exc, KeyError) else str(exc))


def _scenario(path, seed, agent, battles, out, skip_unknown, workers=None) -> harness.ScenarioSpec:
    try:
        spec = harness.load_scenario(path)
        return harness.override(spec, seed=seed, agent=agent, battles=battles, out=out,
                                skip_unknown=True if skip_unknown else None, workers=workers)
    except USER_ERRORS as exc:
        _fail(exc)


def _parse_triple(text: str) -> tuple[float, float, float]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise click.BadParameter(f"expected c1,c2,c3, got {text!r}")
    return tuple(parts)


@click.group()
@click.option("-v", "--verbose", count=True, help="More logging (-v info, -vv debug).")
def main(verbose):
    """Simulation-driven metagame discovery."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


scenario_options = [
    click.argument("scenario", type=click.Path(exists=True, dir_okay=False)),
    click.option("--seed", type=int, help="Override the scenario's master seed."),
    click.option("--agent", type=click.Choice(AGENT_KINDS), help="Battle agent for both sides."),
    click.option("--battles", type=click.IntRange(min=1), help="Override the total battle budget."),
    click.option("--out", type=click.Path(file_okay=False), help="Output directory."),
    click.option("--skip-unknown", is_flag=True, help="Drop usage rows naming unknown species."),
]


def with_scenario_options(fn):
    for opt in reversed(scenario_options):
        fn = opt(fn)
    return fn


@main.command()
@with_scenario_options
@click.option("--workers", type=click.IntRange(min=1), help="Battle worker processes.")
@click.option("--resume", type=click.Path(exists=True, dir_okay=False), help="Checkpoint to continue.")
@click.option("--battle-log", type=click.Path(dir_okay=False), help="Write per-turn JSON lines here.")
@click.option("--log-battles", type=click.IntRange(min=0), default=1, show_default=True,
              help="How many leading battles go to --battle-log.")
def run(scenario, seed, agent, battles, out, skip_unknown, workers, resume, battle_log, log_battles):
    """Run an ABC or BSD scenario end to end and write reports."""
    spec = _scenario(scenario, seed, agent, battles, out, skip_unknown, workers)
    try:
        ckpt = Checkpoint.load(resume) if resume else None
        sink = open(battle_log, "w") if battle_log else None
        try:
            hook = (lambda entry: sink.write(json.dumps(entry) + "\n")) if sink else None
            result = harness.run_scenario(spec, resume=ckpt, battle_log=hook,
                                          log_battles=log_battles if sink else 0)
        finally:
            if sink:
                sink.close()
    except USER_ERRORS as exc:
        _fail(exc)
    click.echo(harness.rows_to_text(result.rows, f"{spec.name} ({spec.mode})"), nl=False)
    click.echo(f"reports written to {spec.output_dir}")


@main.command()
@with_scenario_options
@click.option("--grid", "grid", multiple=True, callback=lambda ctx, p, v: [_parse_triple(x) for x in v],
              help="Weight triple c1,c2,c3 (repeatable); default is the 8-row grid.")
def gridsearch(scenario, seed, agent, battles, out, skip_unknown, grid):
    """Sweep the balance-change score weights over a grid."""
    spec = _scenario(scenario, seed, agent, battles, out, skip_unknown)
    try:
        rows = harness.run_grid_search(spec, grid or harness.DEFAULT_GRID)
    except USER_ERRORS as exc:
        _fail(exc)
    table = [{"c1": r.c1, "c2": r.c2, "c3": r.c3, "EditDistance": r.edit_distance, "Overlap": r.overlap}
             for r in rows]
    click.echo(harness.rows_to_text(table, f"{spec.name}: weight grid"), nl=False)


@main.command()
@click.option("--out", type=click.Path(file_okay=False), required=True, help="Output directory.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--size", type=click.IntRange(min=12), default=740, show_default=True)
@click.option("--types", "type_count", type=click.IntRange(min=2), default=18, show_default=True)
@click.option("--dominant", is_flag=True, help="Plant one character that outclasses the rest.")
@click.option("--scenarios", is_flag=True,
              help="Also write synthetic ABC and BSD scenarios (implies --dominant).")
@click.option("--meta-size", type=click.IntRange(min=1), default=12, show_default=True,
              help="Meta size used by --scenarios.")
def fixture(out, seed, size, type_count, dominant, scenarios, meta_size):
    """Generate a synthetic roster and tier file."""
    from .fixtures import write_fixture
    params = {"seed": seed, "size": size, "type_count": type_count, "dominant": dominant or scenarios,
              "scenarios": scenarios, "meta_size": meta_size}
    try:
        if scenarios:
            syn = harness.write_synthetic_scenarios(out, seed, size, type_count, meta_size)
            click.echo(f"scenarios: {syn.abc} {syn.bsd} (dominant {syn.dominant})")
        else:
            fx = write_fixture(out, seed, size, type_count, dominant)
            click.echo(f"roster: {fx.roster_path}  tiers: {fx.tier_path}  "
                       + " ".join(f"{t}={n}" for t, n in fx.tiers.items()))
    except ValueError as exc:
        _fail(exc)
    harness.write_manifest(out, harness.command_manifest("fixture", params, seed=seed))


@main.command()
@click.argument("reference", type=click.Path(exists=True, dir_okay=False))
@click.argument("candidate", type=click.Path(exists=True, dir_okay=False))
@click.option("--pre", type=click.Path(exists=True, dir_okay=False),
              help="Pre-change ranking A; enables edit distance and rank correlation.")
@click.option("--banned", multiple=True, help="Banned species; adds a naive-baseline row (needs --pre).")
@click.option("--meta-size", type=click.IntRange(min=1), help="Meta cut for CSV snapshots and usage tables.")
@click.option("--tiers", type=click.Path(exists=True, dir_okay=False),
              help="Tier file; adds a tier capture report for the candidate.")
@click.option("--tier-order", default="AG,Ubers,OU", show_default=True)
@click.option("--out", type=click.Path(file_okay=False), help="Write metrics.csv/json and a manifest here.")
def metrics(reference, candidate, pre, banned, meta_size, tiers, tier_order, out):
    """Compare a candidate ranking against a reference ranking offline."""
    try:
        b = harness.load_ranking(reference, meta_size)
        cand = harness.load_ranking(candidate, meta_size or b.meta_size)
        rows = []
        if pre:
            a = harness.load_ranking(pre, meta_size or b.meta_size)
            if banned:
                rows.append(harness.abc_row("Naive Baseline", a, b, naive_baseline(a, banned)))
            rows.append(harness.abc_row("Candidate", a, b, cand))
        else:
            rows.append({"method": "Candidate", "overlap": overlap(b, cand)})
        if tiers:
            tier_map = json.loads(Path(tiers).read_text())
            rows.append(harness.tier_row("Candidate tiers", cand, tier_map, tier_order.split(",")))
    except USER_ERRORS as exc:
        _fail(exc)
    for row in rows:
        click.echo(harness.rows_to_text([row]), nl=False)
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / "metrics.csv").write_text(harness.rows_to_csv(rows))
        (Path(out) / "metrics.json").write_text(json.dumps(rows, indent=1) + "\n")
        inputs = [p for p in (reference, candidate, pre, tiers) if p]
        harness.write_manifest(out, harness.command_manifest(
            "metrics", {"banned": list(banned), "meta_size": meta_size, "tier_order": tier_order},
            inputs))


@main.command()
@click.argument("usage", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--roster", type=click.Path(exists=True, dir_okay=False), help="Convert to initial stats.")
@click.option("--nominal-battles", type=click.IntRange(min=1), default=100_000, show_default=True)
@click.option("--skip-unknown", is_flag=True, help="Drop rows naming species missing from the roster.")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True, help="Output directory.")
def ingest(usage, roster, nominal_battles, skip_unknown, fmt, out):
    """Parse and average monthly usage tables; optionally emit initial stats."""
    out_dir = Path(out)
    try:
        records = average_months([read_usage(p) for p in usage])
        out_dir.mkdir(parents=True, exist_ok=True)
        if fmt == "json":
            (out_dir / "usage.json").write_text(emit_usage_json(records) + "\n")
        else:
            (out_dir / "usage.txt").write_text(emit_usage_table(records, f"mean of {len(usage)} month(s)"))
        if roster:
            r = load_roster(roster)
            stats = to_initial_stats(records, r, nominal_battles, skip_unknown)
            stats.save(out_dir / "initial_stats.json", [c.species for c in r.characters])
    except USER_ERRORS as exc:
        _fail(exc)
    click.echo(f"{len(records)} species averaged over {len(usage)} month(s) -> {out_dir}")
    harness.write_manifest(out_dir, harness.command_manifest(
        "ingest", {"nominal_battles": nominal_battles, "skip_unknown": skip_unknown, "format": fmt},
        [*usage, *([roster] if roster else [])]))


if __name__ == "__main__":
    sys.exit(main())
