"""End-to-end scenarios: ingest, discover, compare, and write reports.

A scenario file is JSON; relative paths resolve against the file's directory::

    {
      "name": "synthetic-abc",
      "mode": "ABC",                      # or "BSD"
      "roster": "roster.json",
      "tiers": "tiers.json",
      "pre_ban_usage": ["pre_1.txt", "pre_2.txt", "pre_3.txt"],
      "post_ban_usage": ["post_1.txt", "post_2.txt", "post_3.txt"],
      "banned": ["mon017"],
      "tier_order": ["AG", "Ubers", "OU"],
      "nominal_battles": 100000,
      "output_dir": "out",
      "run": {"total_battles": 450000, "meta_size": 40, "seed": 0, ...}
    }

``run`` accepts every RunConfig field; score weights and the epsilon schedule
default to the mode's standard settings.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import platform
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Sequence

import numpy as np

from . import ingestion
from .discovery import (Checkpoint, MetaSnapshot, RankEntry, RunConfig, apply_ban, banned_mask,
                        run_discovery)
from .fixtures import TIER_ORDER, write_fixture
from .ingestion import UsageRecord, average_months, emit_usage_table, read_usage, to_initial_stats
from .metrics import (bst_baseline, edit_distance, edit_distance_delta, naive_baseline, overlap,
                      rank_changes, spearman, tier_capture)
from .oracle import matchup_table, oracle_meta
from .rng import derive_seed
from .roster import Roster, load_roster
from .teambuilder import ABC, BSD, EpsilonSchedule, ScoreWeights

# Weight triples (c1, c2, c3) of the appendix grid search, in table order.
DEFAULT_GRID = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1),
                (0.5, 0.5, 0), (0.5, 0, 0.5), (0, 0.5, 0.5), (0.5, 0.25, 0.25))


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    mode: str
    roster_path: Path
    tier_path: Path | None
    run: RunConfig
    output_dir: Path
    pre_ban_usage: tuple[Path, ...] = ()
    post_ban_usage: tuple[Path, ...] = ()
    banned: tuple[str, ...] = ()
    tier_order: tuple[str, ...] = ("AG", "Ubers", "OU")
    nominal_battles: int = 100_000
    skip_unknown: bool = False
    blank_slate_baseline: bool = False

    def __post_init__(self):
        if self.mode not in (ABC, BSD):
            raise ScenarioError(f"unknown mode {self.mode!r}")
        if self.run.mode != self.mode:
            raise ScenarioError(f"score weights are for {self.run.mode}, scenario is {self.mode}")
        if self.mode == ABC and not self.pre_ban_usage:
            raise ScenarioError("ABC scenarios need pre_ban_usage files")
        if self.mode == BSD and (self.banned or self.post_ban_usage):
            raise ScenarioError("BSD scenarios take no ban or post-ban usage")

    def to_dict(self) -> dict:
        return {
            "name": self.name, "mode": self.mode, "roster": str(self.roster_path),
            "tiers": None if self.tier_path is None else str(self.tier_path),
            "pre_ban_usage": [str(p) for p in self.pre_ban_usage],
            "post_ban_usage": [str(p) for p in self.post_ban_usage],
            "banned": list(self.banned), "tier_order": list(self.tier_order),
            "nominal_battles": self.nominal_battles, "skip_unknown": self.skip_unknown,
            "blank_slate_baseline": self.blank_slate_baseline,
            "output_dir": str(self.output_dir), "run": self.run.to_dict(),
        }


def _mode_defaults(mode: str) -> dict:
    if mode == ABC:
        return {"weights": ScoreWeights.abc(), "epsilon": EpsilonSchedule.abc(),
                "blanket_ban_tiers": ("LC",)}
    return {"weights": ScoreWeights.bsd(), "epsilon": EpsilonSchedule.bsd(), "blanket_ban_tiers": ()}


def scenario_from_dict(doc: dict, base: Path = Path(".")) -> ScenarioSpec:
    def resolve(p):
        return None if p is None else (base / p if not Path(p).is_absolute() else Path(p))

    try:
        mode = doc["mode"]
        run_doc = dict(doc.get("run", {}))
        run_fields = _mode_defaults(mode)
        if "weights" in run_doc:
            run_fields["weights"] = ScoreWeights(**{"mode": mode, **run_doc.pop("weights")})
        if "epsilon" in run_doc:
            run_fields["epsilon"] = EpsilonSchedule(**run_doc.pop("epsilon"))
        run_fields.update(run_doc)
        return ScenarioSpec(
            name=doc.get("name", "scenario"), mode=mode,
            roster_path=resolve(doc["roster"]), tier_path=resolve(doc.get("tiers")),
            run=RunConfig(**run_fields), output_dir=resolve(doc.get("output_dir", "out")),
            pre_ban_usage=tuple(resolve(p) for p in doc.get("pre_ban_usage", ())),
            post_ban_usage=tuple(resolve(p) for p in doc.get("post_ban_usage", ())),
            banned=tuple(doc.get("banned", ())),
            tier_order=tuple(doc.get("tier_order", ("AG", "Ubers", "OU"))),
            nominal_battles=int(doc.get("nominal_battles", 100_000)),
            skip_unknown=bool(doc.get("skip_unknown", False)),
            blank_slate_baseline=bool(doc.get("blank_slate_baseline", False)),
        )
    except KeyError as exc:
        raise ScenarioError(f"scenario is missing {exc.args[0]!r}") from None
    except TypeError as exc:
        raise ScenarioError(f"bad scenario field: {exc}") from None


def load_scenario(path: str | Path) -> ScenarioSpec:
    path = Path(path)
    return scenario_from_dict(json.loads(path.read_text()), path.parent)


def override(spec: ScenarioSpec, seed: int | None = None, agent: str | None = None,
             battles: int | None = None, out: str | Path | None = None,
             skip_unknown: bool | None = None, workers: int | None = None) -> ScenarioSpec:
    """Apply CLI overrides; a battle budget below the update interval shrinks the interval."""
    run = spec.run
    changes = {}
    if seed is not None:
        changes["seed"] = seed
    if agent is not None:
        changes["agent"] = agent
    if workers is not None:
        changes["workers"] = workers
    if battles is not None:
        changes["total_battles"] = battles
        changes["stats_update_interval"] = min(run.stats_update_interval, battles)
    run = dataclasses.replace(run, **changes)
    spec_changes = {"run": run}
    if out is not None:
        spec_changes["output_dir"] = Path(out)
    if skip_unknown is not None:
        spec_changes["skip_unknown"] = skip_unknown
    return dataclasses.replace(spec, **spec_changes)


def _check_files(spec: ScenarioSpec):
    paths = [spec.roster_path, spec.tier_path, *spec.pre_ban_usage, *spec.post_ban_usage]
    missing = [str(p) for p in paths if p is not None and not Path(p).exists()]
    if missing:
        raise ScenarioError(f"missing input files: {missing}")


def usage_snapshot(records: Sequence[UsageRecord], meta_size: int) -> MetaSnapshot:
    return MetaSnapshot(tuple(RankEntry(r.species, r.usage) for r in records), meta_size)


def load_ranking(path: str | Path, meta_size: int | None = None) -> MetaSnapshot:
    """Read a meta snapshot (JSON or CSV) or a usage table as a ranking."""
    path = Path(path)
    if path.suffix == ".csv":
        if meta_size is None:
            raise ScenarioError(f"{path}: CSV snapshots need --meta-size")
        return MetaSnapshot.from_csv(path.read_text(), meta_size)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        if isinstance(doc, dict):
            snap = MetaSnapshot.from_dict(doc)
            return snap if meta_size is None else MetaSnapshot(snap.ranking, meta_size)
        records = ingestion.parse_usage_json(doc, str(path))
    else:
        records = ingestion.parse_usage_table(path.read_text(), str(path))
    if meta_size is None:
        raise ScenarioError(f"{path}: usage tables need --meta-size")
    return usage_snapshot(records, meta_size)


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _version(dist: str) -> str:
    try:
        return metadata.version(dist)
    except metadata.PackageNotFoundError:
        return "unknown"


def versions() -> dict:
    return {"python": platform.python_version(), "numpy": np.__version__,
            "scipy": _version("scipy"), "click": _version("click"), "artifact": _version("artifact")}


def command_manifest(command: str, params: dict, inputs: Sequence[str | Path] = (),
                     seed: int | None = None) -> dict:
    """Manifest for any CLI command: parameters, input hashes and library versions."""
    doc = json.dumps(params, sort_keys=True, default=str)
    return {"command": command, "params": json.loads(doc), "seed": seed,
            "config_digest": hashlib.sha256(doc.encode()).hexdigest()[:16],
            "inputs": {str(p): _sha256(p) for p in inputs}, "versions": versions()}


def write_manifest(out_dir: str | Path, doc: dict) -> Path:
    path = Path(out_dir) / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return path


def manifest(spec: ScenarioSpec) -> dict:
    inputs = [spec.roster_path, spec.tier_path, *spec.pre_ban_usage, *spec.post_ban_usage]
    doc = spec.to_dict()
    doc.pop("output_dir")
    return {
        "command": "run",
        "scenario": doc,
        "config_digest": spec.run.digest(),
        "seed": spec.run.seed,
        "inputs": {str(p): _sha256(p) for p in inputs if p is not None},
        "versions": versions(),
    }


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    discovered: MetaSnapshot
    rows: list[dict]
    checkpoint: Checkpoint
    monthly: list[MetaSnapshot]
    pre: MetaSnapshot | None = None
    post: MetaSnapshot | None = None
    files: list[Path] = field(default_factory=list)


def abc_row(method: str, a: MetaSnapshot, b: MetaSnapshot, candidate: MetaSnapshot) -> dict:
    """One comparison row: Overlap, Edit Distance delta and rank-change correlation."""
    row = {"method": method, "overlap": overlap(b, candidate),
           "edit_distance": edit_distance(a, candidate),
           "edit_distance_delta": edit_distance_delta(a, b, candidate)}
    dx, dy = rank_changes(a, b, candidate)
    try:
        corr = spearman(dx, dy)
        row.update(rho=corr.rho, p_value=corr.p_value, n=corr.n)
    except ValueError:
        row.update(rho=math.nan, p_value=math.nan, n=len(dx))
    return row


def tier_row(method: str, snap: MetaSnapshot, tier_map: dict, tiers: Sequence[str]) -> dict:
    report = tier_capture(snap, tier_map, tiers)
    row = {"method": method}
    row.update({f"capture_{t}": v for t, v in report.capture.items()})
    row.update({f"composition_{t}": v for t, v in report.composition.items()})
    return row


def prepare_abc(spec: ScenarioSpec, roster: Roster):
    pre_records = average_months([read_usage(p) for p in spec.pre_ban_usage])
    initial = to_initial_stats(pre_records, roster, spec.nominal_battles, spec.skip_unknown)
    a = usage_snapshot(pre_records, spec.run.meta_size)
    b = None
    if spec.post_ban_usage:
        b = usage_snapshot(average_months([read_usage(p) for p in spec.post_ban_usage]),
                           spec.run.meta_size)
    return initial, a, b


def run_scenario(spec: ScenarioSpec, write: bool = True, resume: Checkpoint | None = None,
                 battle_log=None, log_battles: int = 0) -> ScenarioResult:
    """Run one scenario end to end; all input problems surface before any battle."""
    _check_files(spec)
    roster = load_roster(spec.roster_path, spec.tier_path)
    for s in spec.banned:
        if s not in roster.species_index:
            raise ScenarioError(f"banned species {s!r} is not in the roster")
    config = apply_ban(spec.run, spec.banned, roster)
    banned_mask(roster, config)
    if spec.mode == ABC:
        initial, a, b = prepare_abc(spec, roster)
        outcome = run_discovery(roster, config, initial, resume=resume,
                                battle_log=battle_log, log_battles=log_battles)
        rows = []
        if b is not None:
            rows.append(abc_row("Naive Baseline", a, b, naive_baseline(a, spec.banned)))
            if spec.blank_slate_baseline:
                bsd_config = dataclasses.replace(config, weights=ScoreWeights.bsd(),
                                                 epsilon=EpsilonSchedule.bsd())
                blank = run_discovery(roster, bsd_config).meta
                rows.insert(0, abc_row("Blank Slate Discovery", a, b, blank))
            rows.append(abc_row(f"Meta Discovery ({config.agent})", a, b, outcome.meta))
        result = ScenarioResult(spec, outcome.meta, rows, outcome.checkpoint, outcome.monthly, a, b)
    else:
        outcome = run_discovery(roster, config, None, resume=resume,
                                battle_log=battle_log, log_battles=log_battles)
        tier_map = roster.tier_map()
        eligible = ~banned_mask(roster, config)
        rows = [tier_row("BST Baseline", bst_baseline(roster, config.meta_size, eligible),
                         tier_map, spec.tier_order),
                tier_row(f"Meta Discovery ({config.agent})", outcome.meta, tier_map, spec.tier_order)]
        result = ScenarioResult(spec, outcome.meta, rows, outcome.checkpoint, outcome.monthly)
    if write:
        result.files = write_reports(result, roster)
    return result


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    if rows:
        fields = list(dict.fromkeys(k for row in rows for k in row))
        writer = csv.DictWriter(buf, fieldnames=fields, restval="", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def rows_to_text(rows: Sequence[dict], title: str = "") -> str:
    if not rows:
        return title + "\n"
    cols = list(rows[0])
    cells = [[_fmt(row[c]) for c in cols] for row in rows]
    widths = [max(len(c), *(len(r[k]) for r in cells)) for k, c in enumerate(cols)]
    lines = [title] if title else []
    lines.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)))
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.rjust(w) if k else v.ljust(w) for k, (v, w) in enumerate(zip(r, widths)))
              for r in cells]
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.3f}"
    return str(v)


def write_reports(result: ScenarioResult, roster: Roster) -> list[Path]:
    out = Path(result.spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []

    def put(name: str, text: str):
        path = out / name
        path.write_text(text)
        files.append(path)

    files.append(write_manifest(out, manifest(result.spec)))
    put("meta_final.csv", result.discovered.to_csv())
    put("meta_final.json", json.dumps(result.discovered.to_dict(), indent=1) + "\n")
    for k, month in enumerate(result.monthly, start=1):
        put(f"meta_month_{k}.csv", month.to_csv())
        put(f"meta_month_{k}.json", json.dumps(month.to_dict(), indent=1) + "\n")
    put("checkpoint.json", json.dumps(result.checkpoint.to_dict(
        [c.species for c in roster.characters])) + "\n")
    put("metrics.csv", rows_to_csv(result.rows))
    put("metrics.json", json.dumps(result.rows, indent=1) + "\n")
    put("report.txt", rows_to_text(result.rows, f"{result.spec.name} ({result.spec.mode})"))
    return files


@dataclass(frozen=True)
class GridRow:
    c1: float
    c2: float
    c3: float
    edit_distance: float
    overlap: float


def run_grid_search(spec: ScenarioSpec, grid: Sequence[Sequence[float]] = DEFAULT_GRID,
                    write: bool = True) -> list[GridRow]:
    """One discovery per weight triple; each row's seed depends only on the triple."""
    if not grid:
        raise ScenarioError("empty weight grid")
    if spec.mode != ABC:
        raise ScenarioError("grid search needs an ABC scenario")
    if not spec.post_ban_usage:
        raise ScenarioError("grid search needs post-ban usage to score against")
    _check_files(spec)
    roster = load_roster(spec.roster_path, spec.tier_path)
    config = apply_ban(spec.run, spec.banned, roster)
    initial, a, b = prepare_abc(spec, roster)
    rows = []
    for c1, c2, c3 in grid:
        run = dataclasses.replace(config, weights=ScoreWeights.abc(c1, c2, c3),
                                  seed=derive_seed(config.seed, "grid", float(c1), float(c2), float(c3)))
        meta = run_discovery(roster, run, initial).meta
        rows.append(GridRow(c1, c2, c3, edit_distance_delta(a, b, meta), overlap(b, meta)))
    if write:
        out = Path(spec.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        table = [{"c1": r.c1, "c2": r.c2, "c3": r.c3, "EditDistance": r.edit_distance,
                  "Overlap": r.overlap} for r in rows]
        (out / "gridsearch.csv").write_text(rows_to_csv(table))
        (out / "gridsearch.txt").write_text(rows_to_text(table, f"{spec.name}: weight grid"))
        write_manifest(out, {**manifest(spec), "command": "gridsearch",
                             "grid": [list(map(float, g)) for g in grid]})
    return rows


# --- synthetic scenarios ---------------------------------------------------

@dataclass(frozen=True)
class SyntheticScenarios:
    abc: Path
    bsd: Path
    dominant: str
    oracle_post: MetaSnapshot
    oracle_pre: MetaSnapshot


def _usage_curve(n: int, decay: float = 0.85) -> np.ndarray:
    w = decay ** np.arange(n)
    return np.minimum(6 * w / w.sum(), 1.0)


def _noisy_months(order: Sequence[str], rng: np.random.Generator, months: int = 3,
                  noise: float = 0.05) -> list[list[UsageRecord]]:
    base = _usage_curve(len(order))
    out = []
    for _ in range(months):
        u = np.clip(base * rng.lognormal(0.0, noise, len(order)), 0.0, 1.0)
        out.append(ingestion.rerank({s: float(np.round(v, 6)) for s, v in zip(order, u)}))
    return out


def write_synthetic_scenarios(out_dir: str | Path, seed: int = 7, size: int = 50, type_count: int = 18,
                              meta_size: int = 12, counters: int | None = None,
                              nominal_battles: int = 1_000, total_battles: int = 20_000,
                              bsd_battles: int = 50_000, team_pool_size: int = 500,
                              agent: str = "heuristic") -> SyntheticScenarios:
    """Write a fixture roster plus matching ABC and BSD scenario files.

    The "true" metas come from the analytic matchup table. Before the ban a
    handful of otherwise mediocre characters that hold up best against the
    dominant character fill the bottom of the meta; once it is banned they
    fall back to their matchup-table rank. A naive baseline keeps them in.
    """
    out_dir = Path(out_dir)
    fx = write_fixture(out_dir, seed, size, type_count, dominant=True)
    roster = load_roster(fx.roster_path, fx.tier_path)
    dom = roster.index(fx.dominant)
    lc = np.array([c.tier == "LC" for c in roster.characters])
    pre_eligible = ~lc
    post_eligible = pre_eligible.copy()
    post_eligible[dom] = False
    table = matchup_table(roster)
    pre_truth = oracle_meta(roster, pre_eligible, meta_size, table)
    post = oracle_meta(roster, post_eligible, meta_size, table)
    k = max(1, meta_size // 3) if counters is None else counters
    tail = [roster.index(s) for s in post.species[meta_size + 1:]]
    checks = sorted(tail, key=lambda i: (-table[i, dom], roster.bst[i], roster.species(i)))[:k]
    check_names = [roster.species(i) for i in checks]
    rest = [s for s in post.species if s not in check_names]
    head = meta_size - 1 - k  # checks fill the bottom of the pre-ban meta
    pre_order = [fx.dominant] + rest[:head] + check_names + rest[head:]
    rng = np.random.default_rng(derive_seed(seed, "usage") % 2**32)
    files = {}
    for label, order in (("pre", pre_order), ("post", post.species)):
        for m, records in enumerate(_noisy_months(order, rng), start=1):
            path = out_dir / f"{label}_ban_{m}.txt"
            path.write_text(emit_usage_table(records, f"synthetic {label}-ban month {m}"))
            files.setdefault(label, []).append(path.name)
    common_run = {"meta_size": meta_size, "team_pool_size": team_pool_size,
                  "stats_update_interval": 1_000, "agent": agent, "seed": seed}
    abc = {"name": "synthetic-abc", "mode": ABC, "roster": "roster.json", "tiers": "tiers.json",
           "pre_ban_usage": files["pre"], "post_ban_usage": files["post"], "banned": [fx.dominant],
           "tier_order": list(TIER_ORDER[:3]), "nominal_battles": nominal_battles,
           "output_dir": "out_abc",
           "run": {**common_run, "total_battles": total_battles,
                   "battles_per_month": max(1, total_battles // 3)}}
    bsd = {"name": "synthetic-bsd", "mode": BSD, "roster": "roster.json", "tiers": "tiers.json",
           "tier_order": list(TIER_ORDER[:3]), "output_dir": "out_bsd",
           "run": {**common_run, "total_battles": bsd_battles,
                   "battles_per_month": max(1, bsd_battles // 3)}}
    abc_path = out_dir / "scenario_abc.json"
    bsd_path = out_dir / "scenario_bsd.json"
    abc_path.write_text(json.dumps(abc, indent=1) + "\n")
    bsd_path.write_text(json.dumps(bsd, indent=1) + "\n")
    pre_usage = MetaSnapshot(tuple(RankEntry(s, 0.0) for s in pre_order), meta_size)
    return SyntheticScenarios(abc_path, bsd_path, fx.dominant, post, pre_usage)
