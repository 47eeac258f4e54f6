# ABOUTME: Shared utility functions for every pipeline stage
# ABOUTME: Config loading, logging setup, label normalization, hashing and atomic output helpers

import hashlib
import json
import logging
import os
import re
import shutil
import tempfile
import unicodedata
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Union

import yaml
from rich.console import Console
from rich.logging import RichHandler

from .exceptions import ConfigurationError

PathLike = Union[str, Path]

ROOT_LOGGER = "scene_mmkg"

_WHITESPACE = re.compile(r"\s+")


def load_config(config_path: PathLike) -> Dict[str, Any]:
    """
    Load a YAML configuration file (JSON documents are valid YAML)

    Args:
        config_path: Path to the config file

    Returns:
        Configuration dictionary
    """
    if not os.path.exists(config_path):
        raise ConfigurationError(f"Configuration file not found: {config_path}")

    with open(config_path, "r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Could not parse {config_path}: {e}")

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"Configuration root must be a mapping: {config_path}")
    return data


def load_json(path: PathLike) -> Any:
    """Read a UTF-8 JSON document, mapping IO/parse failures to ConfigurationError"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise ConfigurationError(f"File not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Invalid JSON in {path}: {e}")


def setup_logging(source_name: str, log_level: str = "INFO",
                  log_dir: Optional[PathLike] = None) -> logging.Logger:
    """
    Set up consistent logging for the pipeline

    Args:
        source_name: Name used for the log file (e.g. 'orchestrator')
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        log_dir: Directory for the file handler; no file log when None

    Returns:
        The configured package logger
    """
    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(getattr(logging, log_level.upper(), logging.INFO))
    logger.propagate = False

    # Remove existing handlers to avoid duplicates
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)
        handler.close()

    if log_dir is not None:
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path / f"{source_name}_pipeline.log", mode="a")
        file_handler.setFormatter(logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        ))
        logger.addHandler(file_handler)

    # Console goes to stderr so stdout stays reserved for JSON artifacts
    console_handler = RichHandler(console=Console(stderr=True), show_path=False)
    console_handler.setFormatter(logging.Formatter("%(name)s - %(message)s"))
    logger.addHandler(console_handler)

    return logger


def normalize_label(value: Optional[str]) -> Optional[str]:
    """
    Normalize a concept, entity or relation label: NFC, lowercase, whitespace collapsed

    Returns:
        Normalized label or None if empty
    """
    if not value or not isinstance(value, str):
        return None

    normalized = _WHITESPACE.sub(" ", unicodedata.normalize("NFC", value)).strip().lower()
    if not normalized:
        return None

    return normalized


def slugify(value: str) -> str:
    label = normalize_label(value) or ""
    return re.sub(r"[^a-z0-9]+", "-", label).strip("-")


def stable_id(kind: str, *parts: str) -> str:
    """Content-derived identifier: sha256 over kind and parts, truncated to 128 bits"""
    payload = "\x1f".join([kind, *parts]).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:32]


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def canonical_json(data: Any) -> str:
    """Single-line canonical JSON (sorted keys, UTF-8 text, no spaces)"""
    return json.dumps(data, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def write_json(path: PathLike, data: Any) -> None:
    """Write pretty, sorted, newline-terminated UTF-8 JSON"""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(data, sort_keys=True, ensure_ascii=False, indent=2))
        f.write("\n")


@contextmanager
def atomic_directory(target: PathLike) -> Iterator[Path]:
    """
    Yield a scratch directory that replaces `target` only if the block succeeds

    On error the scratch directory is removed and `target` is left untouched.
    """
    target_path = Path(target)
    target_path.parent.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=f".{target_path.name}.", dir=target_path.parent))
    try:
        yield scratch
    except BaseException:
        shutil.rmtree(scratch, ignore_errors=True)
        raise

    backup = None
    if target_path.exists():
        backup = target_path.with_name(f".{target_path.name}.old")
        if backup.exists():
            shutil.rmtree(backup)
        os.replace(target_path, backup)
    os.replace(scratch, target_path)
    if backup is not None:
        shutil.rmtree(backup, ignore_errors=True)


@contextmanager
def atomic_file(target: PathLike) -> Iterator[Path]:
    """Yield a temp path in the target's directory, renamed over `target` on success"""
    target_path = Path(target)
    target_path.parent.mkdir(parents=True, exist_ok=True)
    fd, scratch = tempfile.mkstemp(prefix=f".{target_path.name}.", dir=target_path.parent)
    os.close(fd)
    try:
        yield Path(scratch)
    except BaseException:
        if os.path.exists(scratch):
            os.remove(scratch)
        raise
    os.replace(scratch, target_path)
