"""Two-step knowledge population: general ingest, scene ingest, deconflict."""

from .models import ImageDescriptor, RecordError, RejectLog, RelationKind, RelationPolicy, SourceRecord
from .pipeline import KnowledgeFiller, asset_checksum, deconflict, populate_general, populate_scene
from .sources import parse_source_records, read_source_records, source_records

__all__ = [
    "ImageDescriptor",
    "KnowledgeFiller",
    "RecordError",
    "RejectLog",
    "RelationKind",
    "RelationPolicy",
    "SourceRecord",
    "asset_checksum",
    "deconflict",
    "parse_source_records",
    "populate_general",
    "populate_scene",
    "read_source_records",
    "source_records",
]
