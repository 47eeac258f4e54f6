# ABOUTME: Batch orchestrator for building, refining and querying a Scene-MMKG
# ABOUTME: One subcommand per pipeline stage plus `run`, which chains schema -> populate -> refine -> stats

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from rich.console import Console
from rich.table import Table

from scene_mmkg.config import PipelineConfig, parse_overrides
from scene_mmkg.kgcore import KnowledgeSource, SceneMMKG, export_triples_csv, load, save, subgraph
from scene_mmkg.populate import RejectLog, RelationPolicy, populate_general, populate_scene, read_source_records
from scene_mmkg.providers import build_provider
from scene_mmkg.refine import PartLexicon, qcr
from scene_mmkg.schema import LexicalKB, SceneProfile, SceneSchema, design_schema
from scene_mmkg.shared import canonical_json, run_basic_quality_checks, setup_logging, write_json
from scene_mmkg.shared.exceptions import ConfigurationError, ContractError, EntityNotFoundError, SceneMMKGError
from scene_mmkg.shared.similarity import check_threshold
from scene_mmkg.shared.utils import atomic_file
from scene_mmkg.skr import GcnParameters, Query, denoise, encode, expand, pool_anchor_rows, retrieve

DEFAULT_CONFIG = "config/pipeline.yml"


class SceneGraphOrchestrator:
    """Runs Scene-MMKG pipeline stages against one PipelineConfig"""

    def __init__(self, config: PipelineConfig, verbose: bool = False):
        self.config = config
        self.logger = setup_logging("orchestrator", "DEBUG" if verbose else config.log_level, config.log_dir)
        self.results: Dict[str, Dict[str, Any]] = {}
        self.timings: Dict[str, float] = {}

    def _load_schema(self) -> SceneSchema:
        if not self.config.schema_path.is_file():
            raise ConfigurationError(f"No schema at {self.config.schema_path}; run the schema stage first")
        return SceneSchema.from_file(self.config.schema_path)

    def _graph_dir(self, graph_dir: Optional[str]) -> Path:
        return Path(graph_dir) if graph_dir else self.config.refined_dir

    def run_schema(self) -> Dict[str, Any]:
        """Mine, expand and cluster scene concepts into schema.json"""
        files = self.config.require("scene_profile", "template", "lexical_kb")
        self.logger.info(f"Designing schema from {files['scene_profile']}")

        profile = SceneProfile.from_file(files["scene_profile"])
        template = files["template"].read_text(encoding="utf-8")
        lexicon = LexicalKB.from_file(files["lexical_kb"])
        schema = design_schema(profile, template, self.config.llm, lexicon,
                               max_depth=self.config.max_depth, gamma1=self.config.gamma1,
                               embedding_provider=self.config.embedding)

        with atomic_file(self.config.schema_path) as scratch:
            write_json(scratch, schema.to_dict())

        return {
            "status": "success",
            "artifact": str(self.config.schema_path),
            "scene": schema.scene,
            "concepts": len(schema.concepts),
            "hierarchy_edges": len(schema.hierarchy),
        }

    def run_populate(self) -> Dict[str, Any]:
        """Fill general then scene knowledge into the graph directory"""
        files = self.config.require("general_records", "scene_records", "relation_policy")
        schema = self._load_schema()
        policy = RelationPolicy.from_file(files["relation_policy"])
        reject_log = RejectLog()

        general = populate_general(schema, read_source_records(files["general_records"], reject_log), reject_log)
        graph = populate_scene(general, read_source_records(files["scene_records"], reject_log), policy,
                               reject_log, self.config.asset_root)
        quality = run_basic_quality_checks("populate", graph, self.config.asset_root)

        manifest = save(graph, self.config.graph_dir)
        reject_log.write(self.config.rejects_path)

        return {
            "status": "success",
            "artifact": str(self.config.graph_dir),
            "counts": manifest["counts"],
            "rejected": len(reject_log),
            "quality": quality["status"],
        }

    def run_refine(self) -> Dict[str, Any]:
        """QC&R over the populated graph: refined graph dir, report and CDF exports"""
        files = self.config.require("part_lexicon")
        graph = load(self.config.graph_dir)
        lexicon = PartLexicon.from_file(files["part_lexicon"])

        refined, report = qcr(graph, lexicon, self.config.gamma2, self.config.embedding)

        save(refined, self.config.refined_dir)
        with atomic_file(self.config.report_path) as scratch:
            write_json(scratch, report.to_dict())
        report.cdf_before.to_csv(self.config.output_dir / "attribute_cdf_before.csv")
        report.cdf_after.to_csv(self.config.output_dir / "attribute_cdf_after.csv")

        return {
            "status": "success",
            "artifact": str(self.config.refined_dir),
            "report": str(self.config.report_path),
            "edges_before": report.edges_before,
            "edges_after": report.edges_after,
            "distinct_attrs_before": report.distinct_attrs_before,
            "distinct_attrs_after": report.distinct_attrs_after,
        }

    def run_stats(self, graph_dir: Optional[str] = None) -> Dict[str, Any]:
        graph = load(self._graph_dir(graph_dir))
        quality = run_basic_quality_checks("stats", graph, self.config.asset_root)
        stats = quality.pop("counts")
        return {"status": "success", "stats": stats, "quality": quality, "build_log": graph.build_log}

    def _retrieve(self, graph: SceneMMKG, text: Optional[str], observation: Optional[str],
                  k: Optional[int], gamma3: Optional[float], hops: Optional[int]):
        embedder = build_provider(self.config.embedding)
        k = self.config.k if k is None else k
        hops = self.config.hops if hops is None else hops
        gamma3 = check_threshold("gamma3", self.config.gamma3 if gamma3 is None else gamma3, low=-1.0)
        if hops < 0:
            raise ContractError(f"hops must be >= 0, got {hops}")

        observation_vector = embedder.embed(observation) if observation else None
        query = Query(text=text, observation=observation_vector, k=k)
        anchors = retrieve(query, graph, embedder)
        expanded = expand(anchors, graph, hops)
        denoise_with = "observation"
        if observation_vector is None:
            self.logger.info("No observation given; denoising images against the query text")
            observation_vector, denoise_with = embedder.embed(text), "query"
        denoised = denoise(expanded, observation_vector, gamma3, embedder)

        self.logger.info(f"Retrieved {len(anchors)} anchor(s), {len(denoised.textual)} textual and "
                         f"{len(denoised.visual)}/{len(expanded.visual)} visual triples")
        settings = {"text": text, "observation": observation, "k": k, "hops": hops, "gamma3": gamma3,
                    "denoise_with": denoise_with}
        return denoised, settings

    def run_retrieve(self, graph_dir: Optional[str] = None, text: Optional[str] = None,
                     observation: Optional[str] = None, k: Optional[int] = None,
                     gamma3: Optional[float] = None, hops: Optional[int] = None) -> Dict[str, Any]:
        """Retrieve -> expand -> denoise; the subgraph is returned as JSON"""
        graph = load(self._graph_dir(graph_dir))
        denoised, settings = self._retrieve(graph, text, observation, k, gamma3, hops)
        return {"status": "success", "query": settings, "subgraph": denoised.to_dict()}

    def run_encode(self, graph_dir: Optional[str] = None, text: Optional[str] = None,
                   observation: Optional[str] = None, k: Optional[int] = None,
                   gamma3: Optional[float] = None, hops: Optional[int] = None,
                   params_path: Optional[str] = None, output: Optional[str] = None,
                   pool: bool = False) -> Dict[str, Any]:
        """GCN-encode the denoised subgraph of a query into F_H (CSV or JSON)"""
        if params_path:
            params = GcnParameters.from_file(params_path)
        else:
            params = GcnParameters.from_file(self.config.require("gcn_params")["gcn_params"])

        graph = load(self._graph_dir(graph_dir))
        denoised, settings = self._retrieve(graph, text, observation, k, gamma3, hops)
        features = encode(denoised, params, self.config.embedding)

        payload = features.to_dict()
        if pool:
            payload["pooled"] = pool_anchor_rows(features, denoised.anchors).tolist()

        result = {"status": "success", "query": settings, "shape": list(features.shape)}
        if output is None:
            result["features"] = payload
        elif output.endswith(".csv"):
            features.to_csv(output)
            result["artifact"] = output
        else:
            with atomic_file(output) as scratch:
                write_json(scratch, payload)
            result["artifact"] = output
        return result

    def run_export(self, output: str, fmt: str = "jsonl", graph_dir: Optional[str] = None,
                   source: Optional[str] = None, entities: Optional[List[str]] = None) -> Dict[str, Any]:
        """Export a graph, optionally restricted to one source and/or an entity sample"""
        graph = load(self._graph_dir(graph_dir))

        entity_ids = None
        if entities:
            entity_ids = []
            for name in entities:
                if graph.has_entity(name):
                    entity_ids.append(name)
                    continue
                entity = graph.entity_by_label(name)
                if entity is None:
                    raise EntityNotFoundError(f"No entity with id or label '{name}'")
                entity_ids.append(entity.id)
        if source is not None or entity_ids is not None:
            graph = subgraph(graph, source=KnowledgeSource(source) if source else None, entity_ids=entity_ids)

        if fmt == "csv":
            rows = export_triples_csv(graph, output)
            counts = {"triples": rows}
        else:
            counts = save(graph, output)["counts"]
        return {"status": "success", "artifact": output, "format": fmt, "counts": counts}

    def run_full_pipeline(self) -> Dict[str, Any]:
        """schema -> populate -> refine -> stats in one process"""
        self.logger.info("Starting full Scene-MMKG pipeline")
        pipeline_results: Dict[str, Any] = {"stages": self.results, "overall_status": "success"}
        stages = [
            ("schema", self.run_schema),
            ("populate", self.run_populate),
            ("refine", self.run_refine),
            ("stats", self.run_stats),
        ]

        for name, stage in stages:
            start_time = time.perf_counter()
            try:
                self.results[name] = stage()
            except SceneMMKGError as e:
                self.results[name] = {"status": "error", "message": str(e)}
                pipeline_results["overall_status"] = "error"
                raise
            finally:
                self.timings[name] = time.perf_counter() - start_time

        self.logger.info(f"Full pipeline completed in {sum(self.timings.values()):.2f}s")
        return pipeline_results

    def print_summary(self, console: Console) -> None:
        """Rich run summary on stderr; timings never enter an artifact"""
        overall = "error" if any(r.get("status") == "error" for r in self.results.values()) else "success"
        status_emoji = "✅" if overall == "success" else "❌"

        console.print("\n" + "=" * 70)
        console.print("📊 SCENE-MMKG PIPELINE SUMMARY")
        console.print("=" * 70)
        console.print(f"Status: {status_emoji} {overall.upper()}")
        console.print(f"Total execution time: {sum(self.timings.values()):.2f}s")

        table = Table(show_header=True, header_style="bold")
        table.add_column("Stage")
        table.add_column("Status")
        table.add_column("Time", justify="right")
        table.add_column("Details")
        for name, result in self.results.items():
            status = result.get("status", "unknown")
            emoji = "✅" if status == "success" else "❌"
            table.add_row(name, f"{emoji} {status}", f"{self.timings.get(name, 0.0):.2f}s",
                          _describe_stage(name, result))
        console.print(table)
        console.print("=" * 70)


def _describe_stage(name: str, result: Dict[str, Any]) -> str:
    if result.get("status") != "success":
        return result.get("message", "")
    if name == "schema":
        return f"{result['concepts']} concepts, {result['hierarchy_edges']} hierarchy edges"
    if name == "populate":
        return f"{result['counts']['triples']} triples, {result['rejected']} rejected, quality {result['quality']}"
    if name == "refine":
        return (f"edges {result['edges_before']} -> {result['edges_after']}, attributes "
                f"{result['distinct_attrs_before']} -> {result['distinct_attrs_after']}")
    if name == "stats":
        stats = result["stats"]
        return (f"{stats['nodes']} nodes, {stats['edges']} edges, {stats['images']} images, "
                f"quality {result['quality']['status']}")
    return ""


def emit_json(data: Any) -> None:
    sys.stdout.write(json.dumps(data, sort_keys=True, ensure_ascii=False, indent=2))
    sys.stdout.write("\n")
    sys.stdout.flush()


def emit_error(error: BaseException, exit_code: int) -> None:
    sys.stderr.write(canonical_json({"error": type(error).__name__, "message": str(error),
                                     "exit_code": exit_code}))
    sys.stderr.write("\n")
    sys.stderr.flush()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=DEFAULT_CONFIG, help="Pipeline configuration file path")
    common.add_argument("--verbose", "-v", action="store_true", help="Log at DEBUG level")

    parser = argparse.ArgumentParser(
        description="Scene-MMKG pipeline orchestrator",
        epilog="Any configuration field can be overridden after the subcommand, "
               "e.g. --thresholds.gamma1=0.8 or --providers.llm.mode http",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (("schema", "Design the scene schema"),
                            ("populate", "Populate the graph from general and scene records"),
                            ("refine", "Run quality control & refinement"),
                            ("run", "Run schema, populate, refine and stats")):
        commands.add_parser(name, parents=[common], help=help_text, allow_abbrev=False)

    stats = commands.add_parser("stats", parents=[common], help="Graph statistics", allow_abbrev=False)
    stats.add_argument("--graph", help="Graph directory (default: refined graph)")

    for name, help_text in (("retrieve", "Retrieve a denoised subgraph for a query"),
                            ("encode", "GCN-encode the retrieved subgraph of a query")):
        query = commands.add_parser(name, parents=[common], help=help_text, allow_abbrev=False)
        query.add_argument("--graph", help="Graph directory (default: refined graph)")
        query.add_argument("--query", help="Instruction text")
        query.add_argument("--observation", help="Observation text, embedded as the observation vector; "
                                                  "images are denoised against the query text when omitted")
        query.add_argument("--k", type=int, help="Number of anchor entities")
        query.add_argument("--gamma3", type=float, help="Visual denoising threshold in [-1, 1]")
        query.add_argument("--hops", type=int, help="Neighborhood radius around anchors")
        if name == "encode":
            query.add_argument("--params", help="GCN parameters JSON (default: config gcn_params)")
            query.add_argument("--output", help="Write F_H to this .csv or .json file instead of stdout")
            query.add_argument("--pool", action="store_true", help="Include the mean of the anchor rows")

    export = commands.add_parser("export", parents=[common], help="Export a graph", allow_abbrev=False)
    export.add_argument("--graph", help="Graph directory (default: refined graph)")
    export.add_argument("--format", choices=["jsonl", "csv"], default="jsonl",
                        help="jsonl: native graph directory; csv: flat triples file")
    export.add_argument("--output", required=True, help="Output directory (jsonl) or file (csv)")
    export.add_argument("--source", choices=[s.value for s in KnowledgeSource],
                        help="Keep only triples of this knowledge source")
    export.add_argument("--entities", help="Comma-separated entity ids or labels to sample")
    return parser


def dispatch(orchestrator: SceneGraphOrchestrator, args: argparse.Namespace) -> Dict[str, Any]:
    if args.command == "schema":
        return orchestrator.run_schema()
    if args.command == "populate":
        return orchestrator.run_populate()
    if args.command == "refine":
        return orchestrator.run_refine()
    if args.command == "stats":
        return orchestrator.run_stats(args.graph)
    if args.command == "retrieve":
        return orchestrator.run_retrieve(args.graph, args.query, args.observation, args.k, args.gamma3, args.hops)
    if args.command == "encode":
        return orchestrator.run_encode(args.graph, args.query, args.observation, args.k, args.gamma3,
                                       args.hops, args.params, args.output, args.pool)
    if args.command == "export":
        entities = [e.strip() for e in args.entities.split(",") if e.strip()] if args.entities else None
        return orchestrator.run_export(args.output, args.format, args.graph, args.source, entities)

    result = orchestrator.run_full_pipeline()
    orchestrator.print_summary(Console(stderr=True))
    return result


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    load_dotenv()
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)

    orchestrator = None
    try:
        config = PipelineConfig.from_file(args.config, parse_overrides(extras))
        orchestrator = SceneGraphOrchestrator(config, verbose=args.verbose)
        emit_json(dispatch(orchestrator, args))
        return 0
    except KeyboardInterrupt:
        if orchestrator is not None:
            orchestrator.logger.info("Pipeline execution interrupted by user")
        return 130
    except SceneMMKGError as e:
        if orchestrator is not None and args.command == "run":
            orchestrator.print_summary(Console(stderr=True))
        emit_error(e, e.exit_code)
        return e.exit_code
    except (FileNotFoundError, NotADirectoryError) as e:
        emit_error(e, 2)
        return 2
    except Exception as e:
        if orchestrator is not None:
            orchestrator.logger.exception(f"Orchestrator failed: {e}")
        emit_error(e, 1)
        return 1


if __name__ == "__main__":
    sys.exit(main())
