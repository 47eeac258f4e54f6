"""
Source Record Readers
Streams JSONL ingest files of general or scene knowledge as dlt resources
"""
import json
import logging
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

import dlt
from dlt.common.typing import TDataItem

from ..shared.exceptions import ConfigurationError
from .models import RecordError, RejectLog, SourceRecord

logger = logging.getLogger(__name__)

# marks a line that is not valid JSON; carried through to the reject log
INVALID_LINE = "_invalid_line"


@dlt.resource(name="source_records", write_disposition="replace")
def source_records(path: str) -> TDataItem:
    """DLT resource yielding one decoded object per non-blank JSONL line"""
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as e:
                yield {INVALID_LINE: {"line": line_no, "text": line.rstrip("\n"), "error": str(e)}}


def read_source_records(path: Union[str, Path], reject_log: Optional[RejectLog] = None) -> Iterator[SourceRecord]:
    """
    Parse an ingest file into SourceRecords, diverting malformed lines to `reject_log`

    Raises:
        ConfigurationError: the file does not exist
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigurationError(f"Ingest file not found: {file_path}")

    logger.info(f"Reading source records from {file_path}")
    yield from parse_source_records(source_records(str(file_path)), reject_log)


def parse_source_records(items: Iterable, reject_log: Optional[RejectLog] = None) -> Iterator[SourceRecord]:
    """Convert decoded objects (or SourceRecords) into SourceRecords, logging rejects"""
    for item in items:
        if isinstance(item, SourceRecord):
            yield item
            continue
        if isinstance(item, dict) and INVALID_LINE in item:
            bad = item[INVALID_LINE]
            if reject_log is not None:
                reject_log.add(bad["text"], f"Line {bad['line']} is not valid JSON: {bad['error']}")
            continue
        try:
            yield SourceRecord.from_dict(item)
        except RecordError as e:
            if reject_log is not None:
                reject_log.add(item, str(e))
            else:
                logger.warning(f"Rejected record: {e}")
