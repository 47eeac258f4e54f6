# ABOUTME: Canonical on-disk layout for a Scene-MMKG: JSONL records per kind, schema.json, manifest.json
# ABOUTME: Saves atomically and verifies version, per-file checksums and integrity on load

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Union

import pandas as pd

from ..schema.models import SceneSchema
from ..shared.exceptions import ConfigurationError, CorruptionError, IntegrityError, SchemaVersionError
from ..shared.utils import atomic_directory, atomic_file, canonical_json, sha256_file, write_json
from .graph import SceneMMKG
from .models import AttributeKey, Entity, ImageAsset, TailKind, Triple, attribute_key_id

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
MANIFEST_FILE = "manifest.json"
SCHEMA_FILE = "schema.json"
RECORD_FILES = {
    "entities": "entities.jsonl",
    "triples": "triples.jsonl",
    "assets": "assets.jsonl",
    "attributes": "attributes.jsonl",
}
TRIPLE_COLUMNS = ["id", "head", "head_label", "relation", "tail", "tail_label", "tail_kind", "source", "provenance"]


def _write_records(path: Path, records: List[Dict[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(canonical_json(record))
            f.write("\n")


def _read_records(path: Path, parse: Callable[[Dict[str, Any]], Any]) -> List[Any]:
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(parse(json.loads(line)))
            except (ValueError, KeyError, TypeError) as e:
                raise CorruptionError(path.name, f"{path.name} line {line_no} is malformed: {e}")
    return records


def save(graph: SceneMMKG, path: Union[str, Path]) -> Dict[str, Any]:
    """
    Write `graph` to directory `path`, replacing it atomically

    Records are sorted by id and serialized as canonical JSON, so saving the same
    graph twice produces byte-identical files.

    Returns:
        The manifest written alongside the records
    """
    graph.check_integrity()
    payloads = {
        "entities": [e.to_dict() for e in graph.entities()],
        "triples": [t.to_dict() for t in graph.triples()],
        "assets": [a.to_dict() for a in graph.assets()],
        "attributes": [k.to_dict() for k in graph.attribute_keys()],
    }

    with atomic_directory(path) as scratch:
        checksums = {}
        for kind, filename in RECORD_FILES.items():
            _write_records(scratch / filename, payloads[kind])
            checksums[filename] = sha256_file(scratch / filename)
        write_json(scratch / SCHEMA_FILE, graph.schema.to_dict() if graph.schema else None)
        checksums[SCHEMA_FILE] = sha256_file(scratch / SCHEMA_FILE)

        manifest = {
            "version": FORMAT_VERSION,
            "counts": {kind: len(records) for kind, records in payloads.items()},
            "files": checksums,
            "frozen": graph.frozen,
            "build_log": graph.build_log,
        }
        write_json(scratch / MANIFEST_FILE, manifest)

    logger.info(f"Saved graph to {path}: {manifest['counts']}")
    return manifest


def read_manifest(path: Union[str, Path]) -> Dict[str, Any]:
    manifest_path = Path(path) / MANIFEST_FILE
    if not manifest_path.is_file():
        raise ConfigurationError(f"No graph manifest at {manifest_path}")
    try:
        with open(manifest_path, "r", encoding="utf-8") as f:
            manifest = json.load(f)
    except ValueError as e:
        raise CorruptionError(MANIFEST_FILE, f"{MANIFEST_FILE} is not valid JSON: {e}")
    if not isinstance(manifest, dict):
        raise CorruptionError(MANIFEST_FILE, f"{MANIFEST_FILE} is not an object")
    if manifest.get("version") != FORMAT_VERSION:
        raise SchemaVersionError(f"Unsupported graph format version: {manifest.get('version')!r}")
    return manifest


def verify_checksums(path: Union[str, Path], manifest: Dict[str, Any]) -> None:
    root = Path(path)
    expected = manifest.get("files", {})
    for filename in (*RECORD_FILES.values(), SCHEMA_FILE):
        file_path = root / filename
        if not file_path.is_file():
            raise CorruptionError(filename, f"Graph file missing: {filename}")
        if expected.get(filename) != sha256_file(file_path):
            raise CorruptionError(filename)


def load(path: Union[str, Path]) -> SceneMMKG:
    """
    Read a graph directory written by `save`

    Raises:
        ConfigurationError: no manifest at `path`
        SchemaVersionError: unknown format version
        CorruptionError: a file does not match its manifest checksum or record ids
        IntegrityError: the records reference missing entities, assets or keys
    """
    root = Path(path)
    manifest = read_manifest(root)
    verify_checksums(root, manifest)

    with open(root / SCHEMA_FILE, "r", encoding="utf-8") as f:
        schema_data = json.load(f)
    schema = SceneSchema.from_dict(schema_data) if schema_data is not None else None

    entities = _read_records(root / RECORD_FILES["entities"], Entity.from_dict)
    triples = _read_records(root / RECORD_FILES["triples"], Triple.from_dict)
    assets = _read_records(root / RECORD_FILES["assets"], ImageAsset.from_dict)
    keys = _read_records(root / RECORD_FILES["attributes"], AttributeKey.from_dict)

    for triple in triples:
        if Triple.create(triple.head, triple.relation, triple.tail, triple.tail_kind,
                         triple.source).id != triple.id:
            raise CorruptionError(RECORD_FILES["triples"], f"Triple {triple.id} does not match its content")
    for key in keys:
        if attribute_key_id(key.name) != key.id:
            raise CorruptionError(RECORD_FILES["attributes"], f"Attribute key {key.id} does not match its name")

    graph = SceneMMKG(schema)
    graph.build_log = [dict(e) for e in manifest.get("build_log", [])]
    try:
        for entity in entities:
            graph.add_entity(entity)
        for asset in assets:
            graph.add_asset(asset)
        for key in sorted(keys, key=lambda k: (not k.canonical, k.id)):
            graph.add_attribute_key(key)
        graph.extend(triples)
    except IntegrityError as e:
        raise IntegrityError(f"Graph at {root} failed integrity: {e}")

    counts = {"entities": len(graph.entities()), "triples": len(graph.triples()),
              "assets": len(graph.assets()), "attributes": len(graph.attribute_keys())}
    if counts != manifest.get("counts"):
        raise CorruptionError(MANIFEST_FILE, f"Record counts {counts} differ from manifest {manifest.get('counts')}")

    if manifest.get("frozen", True):
        graph.freeze()
    else:
        graph.check_integrity()
    return graph


def triples_frame(graph: SceneMMKG) -> pd.DataFrame:
    """One row per triple with head and tail labels resolved, sorted by triple id"""
    rows = []
    for triple in graph.triples():
        if triple.tail_kind is TailKind.ENTITY:
            tail_label = graph.get_entity(triple.tail).label
        elif triple.tail_kind is TailKind.IMAGE:
            tail_label = graph.get_asset(triple.tail).uri
        else:
            tail_label = triple.tail
        rows.append({
            "id": triple.id,
            "head": triple.head,
            "head_label": graph.get_entity(triple.head).label,
            "relation": triple.relation,
            "tail": triple.tail,
            "tail_label": tail_label,
            "tail_kind": triple.tail_kind.value,
            "source": triple.source.value,
            "provenance": ";".join(triple.provenance),
        })
    return pd.DataFrame(rows, columns=TRIPLE_COLUMNS)


def export_triples_csv(graph: SceneMMKG, path: Union[str, Path]) -> int:
    frame = triples_frame(graph)
    with atomic_file(path) as scratch:
        frame.to_csv(scratch, index=False, lineterminator="\n")
    logger.info(f"Exported {len(frame)} triples to {path}")
    return len(frame)
