"""Ban the dominant character of a synthetic roster and compare the discovered meta to naive."""
import dataclasses
from pathlib import Path

import click

from metadiscovery import harness


@click.command()
@click.option("--out", type=click.Path(path_type=Path), default=Path("runs/synthetic"), show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--battles", type=int, default=20_000, show_default=True)
@click.option("--agent", type=click.Choice(["heuristic", "random"]), default="heuristic", show_default=True)
@click.option("--blank-slate/--no-blank-slate", default=False, help="Also run a blank-slate baseline.")
def main(out, seed, battles, agent, blank_slate):
    synthetic = harness.write_synthetic_scenarios(out, seed=seed, total_battles=battles, agent=agent)
    spec = harness.load_scenario(synthetic.abc)
    if blank_slate:
        spec = dataclasses.replace(spec, blank_slate_baseline=True)
    result = harness.run_scenario(spec)
    click.echo(f"banned {synthetic.dominant}; reports in {spec.output_dir}")
    click.echo(harness.rows_to_text(result.rows, "against the post-ban usage meta"))


if __name__ == "__main__":
    main()
