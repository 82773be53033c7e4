"""Command line pipeline: events file in, per-period artifacts out.

Subcommands cover each stage (ingest, metrics, project, sbm, gof, flow)
plus ``run``, which executes everything into a staging directory and
atomically renames it into place with a sha256 manifest, so an aborted
run leaves no partial outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import shutil
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import bipartite, community, gof, graphio, ingest, projection

SIDES = ("municipalities", "structures")


@dataclass(frozen=True)
class RunConfig:
    events: Path | None = None
    timelines: Path | None = None
    periods: Path | None = None
    output: Path | None = None
    side: str = "municipalities"
    q_min: int = 1
    q_max: int = 6
    em_restarts: int = 5
    em_max_iter: int = 500
    em_tol: float = 1e-6
    em_seed: int | None = None
    gof_sims: int = 10_000
    gof_seed: int | None = None
    gof_condition_on_map: bool = False

    @classmethod
    def from_file(cls, path: Path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        base = path.parent
        em = data.get("em", {})
        gof_cfg = data.get("gof", {})

        def resolve(key):
            return (base / data[key]).resolve() if key in data else None

        config = cls(
            events=resolve("events"),
            timelines=resolve("timelines"),
            periods=resolve("periods"),
            output=resolve("output"),
            side=data.get("side", "municipalities"),
            q_min=int(data.get("q_min", 1)),
            q_max=int(data.get("q_max", 6)),
            em_restarts=int(em.get("restarts", 5)),
            em_max_iter=int(em.get("max_iter", 500)),
            em_tol=float(em.get("tol", 1e-6)),
            em_seed=int(em["seed"]) if "seed" in em else None,
            gof_sims=int(gof_cfg.get("n_sims", 10_000)),
            gof_seed=int(gof_cfg["seed"]) if "seed" in gof_cfg else None,
            gof_condition_on_map=bool(gof_cfg.get("condition_on_map", False)),
        )
        config.validate()
        return config

    def validate(self) -> None:
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}")
        if self.q_min < 1 or self.q_max < self.q_min:
            raise ValueError("q range must satisfy 1 <= q_min <= q_max")
        if self.gof_sims < 1:
            raise ValueError("gof n_sims must be positive")
        if self.em_restarts < 1 or self.em_max_iter < 1:
            raise ValueError("em restarts and max_iter must be positive")
        if not self.em_tol > 0:
            raise ValueError("em tol must be positive")

    def em_config(self) -> community.EmConfig:
        if self.em_seed is None:
            raise ValueError("an explicit EM seed is required (--seed or em.seed)")
        return community.EmConfig(
            seed=self.em_seed,
            restarts=self.em_restarts,
            max_iter=self.em_max_iter,
            tol=self.em_tol,
        )

    def require(self, *fields) -> None:
        for name in fields:
            if getattr(self, name) is None:
                raise ValueError(f"config is missing required field {name!r}")


def _fmt(x) -> str:
    return format(float(x), ".12g")


def _write_csv(path: Path, header, rows) -> None:
    import csv as _csv

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_inputs(config: RunConfig):
    config.require("events", "timelines")
    events = ingest.parse_events(config.events)
    timelines = ingest.parse_timelines(config.timelines)
    partition = (
        ingest.parse_periods(config.periods)
        if config.periods is not None
        else ingest.PeriodPartition.default()
    )
    accepted, rejected = ingest.validate_attribution(events, timelines)
    buckets = ingest.assign_periods(accepted, partition)
    return timelines, partition, buckets, rejected


def _period_dir(out: Path, label: str) -> Path:
    return out / "periods" / label


# ---------------------------------------------------------------------------
# stage writers


def stage_ingest(config: RunConfig, out: Path) -> None:
    _, partition, buckets, rejected = _load_inputs(config)
    _write_csv(
        out / "rejected.csv",
        ("municipality_id", "group_id", "year", "violence_type", "victim_count", "reason"),
        [
            (e.municipality_id, e.group_id, e.year, e.violence_type, e.victim_count, why)
            for e, why in rejected
        ],
    )
    for index in range(len(partition)):
        label = partition.label(index)
        matrix = ingest.build_incidence(buckets[index])
        _write_csv(
            _period_dir(out, label) / "incidence.csv",
            ("municipality_id", *matrix.structures),
            [
                (m, *matrix.counts[i].tolist())
                for i, m in enumerate(matrix.municipalities)
            ],
        )


def _summary_rows(summary: bipartite.StrengthSummary):
    return [tuple(_fmt(v) for v in summary.as_row())]


def stage_metrics(config: RunConfig, out: Path) -> None:
    _, partition, buckets, _ = _load_inputs(config)
    for index in range(len(partition)):
        label = partition.label(index)
        matrix = ingest.build_incidence(buckets[index])
        pdir = _period_dir(out, label)
        n, m, links, density = bipartite.bipartite_order_size_density(matrix)
        components, giant = bipartite.bipartite_components(matrix)
        _write_csv(
            pdir / "bipartite_summary.csv",
            ("measure", "value"),
            [
                ("n_municipalities", n),
                ("n_structures", m),
                ("links", links),
                ("density", _fmt(density)),
                ("components", components),
                ("giant_order", giant),
            ],
        )
        if matrix.shape == (0, 0):
            continue
        for side in SIDES:
            ds = bipartite.degree_and_strength(matrix, side)
            _write_csv(
                pdir / f"bipartite_degree_strength_{side}.csv",
                ("node", "degree", "strength"),
                [(v, d, s) for v, (d, s) in sorted(ds.items())],
            )
        metric_rows = []
        for side in SIDES:
            graph = projection.project(matrix, side)
            strengths = graph.strengths()
            if strengths.size:
                _write_csv(
                    pdir / f"strength_summary_{side}.csv",
                    bipartite.SUMMARY_COLUMNS,
                    _summary_rows(bipartite.strength_summary(strengths)),
                )
            cliques = projection.maximal_cliques(graph)
            _write_csv(
                pdir / f"clique_sizes_{side}.csv",
                ("size", "count"),
                sorted(projection.clique_size_distribution(cliques).items()),
            )
            count, giant_order = projection.graph_components(graph)
            coreness = projection.core_decomposition(graph)
            metric_rows.append((side, "n_nodes", graph.n_nodes))
            metric_rows.append((side, "n_edges", graph.n_edges))
            if graph.n_nodes >= 2:
                metric_rows.append((side, "density", _fmt(projection.graph_density(graph))))
            if graph.n_nodes >= 3:
                metric_rows.append(
                    (side, "transitivity", _fmt(projection.global_transitivity(graph)))
                )
                for kind in ("degree", "closeness", "betweenness"):
                    metric_rows.append(
                        (
                            side,
                            f"centralization_{kind}",
                            _fmt(projection.centralization(graph, kind)),
                        )
                    )
            metric_rows.append((side, "components", count))
            metric_rows.append((side, "giant_order", giant_order))
            metric_rows.append((side, "clique_number", max(len(c) for c in cliques)))
            metric_rows.append((side, "n_maximal_cliques", len(cliques)))
            values = list(coreness.values())
            metric_rows.append((side, "mean_coreness", _fmt(sum(values) / len(values))))
            metric_rows.append((side, "max_coreness", max(values)))
        _write_csv(pdir / "projection_metrics.csv", ("side", "measure", "value"), metric_rows)


def stage_project(config: RunConfig, out: Path, formats=("graphml", "edgelist_csv")) -> None:
    timelines, partition, buckets, _ = _load_inputs(config)
    faction = {t.group_id: t.faction for t in timelines}
    extension = {"graphml": "graphml", "edgelist_csv": "edges.csv", "json": "json"}
    for index in range(len(partition)):
        label = partition.label(index)
        matrix = ingest.build_incidence(buckets[index])
        if matrix.shape == (0, 0):
            continue
        for side in SIDES:
            graph = projection.project(matrix, side)
            if side == "structures":
                attrs = {v: {"mode": "structure", "faction": faction[v]} for v in graph.nodes}
            else:
                attrs = {v: {"mode": "municipality"} for v in graph.nodes}
            for fmt in formats:
                data = graphio.export_graph(graph, fmt, node_attrs=attrs)
                path = _period_dir(out, label) / f"{side}.{extension[fmt]}"
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_bytes(data)


def stage_sbm(config: RunConfig, out: Path) -> dict[str, community.SbmFit]:
    _, partition, buckets, _ = _load_inputs(config)
    em = config.em_config()
    fits: dict[str, community.SbmFit] = {}
    for index in range(len(partition)):
        label = partition.label(index)
        matrix = ingest.build_incidence(buckets[index])
        if matrix.shape == (0, 0):
            continue
        graph = projection.project(matrix, config.side)
        candidates = [q for q in range(config.q_min, config.q_max + 1) if q <= graph.n_nodes]
        if not candidates or graph.n_nodes < 2:
            continue
        fit, curve = community.select_communities(graph, candidates, em)
        fits[label] = fit
        pdir = _period_dir(out, label)
        payload = fit.to_dict()
        payload["side"] = config.side
        _write_json(pdir / "sbm_fit.json", payload)
        _write_csv(pdir / "icl_curve.csv", ("q", "icl"), [(q, _fmt(v)) for q, v in curve])
        stats = community.community_vertex_stats(graph, fit.map_partition)
        _write_csv(
            pdir / "community_stats.csv",
            (
                "community",
                "size",
                "intra_degree_mean",
                "intra_degree_cv_pct",
                "degree_mean",
                "degree_cv_pct",
                "clustering_mean",
            ),
            [
                (
                    s.label,
                    s.size,
                    _fmt(s.intra_degree_mean),
                    _fmt(s.intra_degree_cv),
                    _fmt(s.degree_mean),
                    _fmt(s.degree_cv),
                    _fmt(s.clustering_mean),
                )
                for s in stats
            ],
        )
    return fits


def _load_fit(out: Path, label: str) -> community.SbmFit | None:
    path = _period_dir(out, label) / "sbm_fit.json"
    if not path.exists():
        return None
    with open(path, "r", encoding="utf-8") as fh:
        return community.SbmFit.from_dict(json.load(fh))


def stage_gof(
    config: RunConfig, out: Path, fits: dict[str, community.SbmFit] | None = None
) -> None:
    _, partition, buckets, _ = _load_inputs(config)
    if config.gof_seed is None:
        raise ValueError("an explicit GOF seed is required (--gof-seed or gof.seed)")
    wrote_any = False
    for index in range(len(partition)):
        label = partition.label(index)
        fit = fits.get(label) if fits is not None else _load_fit(out, label)
        if fit is None:
            continue
        wrote_any = True
        matrix = ingest.build_incidence(buckets[index])
        graph = projection.project(matrix, config.side)
        report = gof.gof_report(
            graph,
            fit,
            n_sims=config.gof_sims,
            seed=config.gof_seed,
            condition_on_map=config.gof_condition_on_map,
        )
        pdir = _period_dir(out, label)
        _write_csv(
            pdir / "gof_report.csv",
            ("statistic", "observed", "lower", "median", "upper", "percentile", "in_envelope"),
            [
                (
                    s.name,
                    _fmt(s.observed),
                    _fmt(s.lower),
                    _fmt(s.median),
                    _fmt(s.upper),
                    _fmt(s.percentile),
                    str(s.in_envelope).lower(),
                )
                for s in report.statistics
            ],
        )
        _write_csv(
            pdir / "gof_draws.csv",
            ("statistic", "iteration", "value"),
            (
                (name, i, _fmt(report.draws[i, k]))
                for k, name in enumerate(report.names)
                for i in range(report.n_sims)
            ),
        )
    if fits is None and not wrote_any:
        raise ValueError("no SBM fits found in the output directory; run the sbm stage first")


def stage_flow(
    config: RunConfig, out: Path, fits: dict[str, community.SbmFit] | None = None
) -> None:
    _, partition, _, _ = _load_inputs(config)
    labels = partition.labels()
    wrote_any = False
    for earlier, later in zip(labels, labels[1:]):
        fit_a = fits.get(earlier) if fits is not None else _load_fit(out, earlier)
        fit_b = fits.get(later) if fits is not None else _load_fit(out, later)
        if fit_a is None or fit_b is None:
            continue
        flow = community.community_flow(fit_a.map_partition, fit_b.map_partition)
        _write_csv(
            out / "flows" / f"{earlier}__{later}.csv",
            ("source", "target", "count"),
            flow.to_rows(),
        )
        wrote_any = True
    if fits is None and not wrote_any:
        raise ValueError(
            "no consecutive SBM fits found in the output directory; run the sbm stage first"
        )


def _manifest(out: Path) -> dict:
    files = {}
    for path in sorted(out.rglob("*")):
        if path.is_file():
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            files[path.relative_to(out).as_posix()] = digest
    return {"files": files}


def run_pipeline(config: RunConfig, force: bool = False) -> dict:
    """Execute every stage into a staging directory, then rename into place.

    Validation errors abort before anything lands at the output path; the
    returned manifest maps each artifact to its sha256.
    """
    config.validate()
    config.require("events", "timelines", "output")
    config.em_config()
    if config.gof_seed is None:
        raise ValueError("an explicit GOF seed is required (--gof-seed or gof.seed)")
    out = config.output
    if out.exists() and not force:
        raise ValueError(f"output path {out} already exists (use --force to replace)")
    staging = out.parent / (out.name + ".staging")
    if staging.exists():
        shutil.rmtree(staging)
    staging.mkdir(parents=True)
    try:
        stage_ingest(config, staging)
        stage_metrics(config, staging)
        stage_project(config, staging)
        fits = stage_sbm(config, staging)
        stage_gof(config, staging, fits)
        stage_flow(config, staging, fits)
        manifest = _manifest(staging)
        _write_json(staging / "manifest.json", manifest)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    if out.exists():
        shutil.rmtree(out)
    os.replace(staging, out)
    return manifest


# ---------------------------------------------------------------------------
# argument parsing


def _apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates = {}
    mapping = {
        "events": "events",
        "timelines": "timelines",
        "periods": "periods",
        "output": "output",
        "side": "side",
        "q_min": "q_min",
        "q_max": "q_max",
        "em_restarts": "em_restarts",
        "em_max_iter": "em_max_iter",
        "em_tol": "em_tol",
        "seed": "em_seed",
        "gof_sims": "gof_sims",
        "gof_seed": "gof_seed",
    }
    for arg_name, field_name in mapping.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            if field_name in ("events", "timelines", "periods", "output"):
                value = Path(value).resolve()
            updates[field_name] = value
    if getattr(args, "condition_on_map", False):
        updates["gof_condition_on_map"] = True
    config = replace(config, **updates)
    config.validate()
    return config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conflictnet",
        description="Victimization event networks: build, fit, and check.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--events", help="events CSV path")
    common.add_argument("--timelines", help="group timelines CSV path")
    common.add_argument("--periods", help="periods JSON path")
    common.add_argument("--output", help="output directory")
    common.add_argument("--side", choices=SIDES, help="projection side for SBM/GOF")
    common.add_argument("--q-min", dest="q_min", type=int)
    common.add_argument("--q-max", dest="q_max", type=int)
    common.add_argument("--em-restarts", dest="em_restarts", type=int)
    common.add_argument("--em-max-iter", dest="em_max_iter", type=int)
    common.add_argument("--em-tol", dest="em_tol", type=float)
    common.add_argument("--seed", type=int, help="EM seed")
    common.add_argument("--gof-sims", dest="gof_sims", type=int)
    common.add_argument("--gof-seed", dest="gof_seed", type=int)
    common.add_argument(
        "--condition-on-map",
        dest="condition_on_map",
        action="store_true",
        help="simulate GOF draws at the MAP labels instead of the mixing law",
    )
    for name in ("ingest", "metrics", "sbm", "gof", "flow"):
        sub.add_parser(name, parents=[common])
    project_parser = sub.add_parser("project", parents=[common])
    project_parser.add_argument(
        "--format",
        choices=graphio.FORMATS,
        action="append",
        help="export format (repeatable; default graphml and edgelist_csv)",
    )
    run_parser = sub.add_parser("run", parents=[common])
    run_parser.add_argument(
        "--force", action="store_true", help="replace an existing output directory"
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = (
            RunConfig.from_file(args.config) if args.config is not None else RunConfig()
        )
        config = _apply_overrides(config, args)
        if args.command == "run":
            run_pipeline(config, force=args.force)
            print(f"pipeline complete: {config.output}")
            return 0
        config.require("output")
        out = config.output
        if args.command == "ingest":
            stage_ingest(config, out)
        elif args.command == "metrics":
            stage_metrics(config, out)
        elif args.command == "project":
            formats = tuple(args.format) if args.format else ("graphml", "edgelist_csv")
            stage_project(config, out, formats)
        elif args.command == "sbm":
            stage_sbm(config, out)
        elif args.command == "gof":
            stage_gof(config, out)
        elif args.command == "flow":
            stage_flow(config, out)
        print(f"{args.command} complete: {out}")
        return 0
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
