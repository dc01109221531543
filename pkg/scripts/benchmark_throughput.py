"""Battles per second for full discovery windows on a large fixture roster."""
import os
import tempfile
import time

import click

from metadiscovery.discovery import RunConfig, run_discovery
from metadiscovery.fixtures import write_fixture
from metadiscovery.roster import load_roster
from metadiscovery.teambuilder import EpsilonSchedule, ScoreWeights


@click.command()
@click.option("--size", type=int, default=740, show_default=True)
@click.option("--battles", type=int, default=10_000, show_default=True)
@click.option("--workers", type=int, default=os.cpu_count() or 1, show_default=True)
@click.option("--agent", type=click.Choice(["heuristic", "random"]), default="heuristic", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def main(size, battles, workers, agent, seed):
    with tempfile.TemporaryDirectory() as tmp:
        fx = write_fixture(tmp, seed, size, 18)
        roster = load_roster(fx.roster_path, fx.tier_path)
    cfg = RunConfig(total_battles=battles, battles_per_month=battles, stats_update_interval=min(1_000, battles),
                    team_pool_size=500, meta_size=40, blanket_ban_tiers=(), agent=agent, seed=seed,
                    weights=ScoreWeights.bsd(), epsilon=EpsilonSchedule.bsd(), workers=workers)
    start = time.perf_counter()
    run_discovery(roster, cfg)
    elapsed = time.perf_counter() - start
    click.echo(f"{battles} battles in {elapsed:.1f}s: {battles / elapsed:,.0f} battles/s "
               f"({workers} worker(s), {agent} agent, {size} characters)")


if __name__ == "__main__":
    main()
