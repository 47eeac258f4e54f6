# ABOUTME: Pipeline configuration: input files, provider configs, thresholds and output locations
# ABOUTME: Loaded from one YAML/JSON document; any field can be overridden by a dotted command-line flag

import copy
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import yaml

from .providers import ProviderConfig
from .shared.exceptions import ConfigurationError, ContractError
from .shared.similarity import check_threshold
from .shared.utils import load_config

LOG_LEVEL_ENV_VAR = "SCENE_MMKG_LOG_LEVEL"

INPUT_FILES = (
    "scene_profile",
    "template",
    "lexical_kb",
    "part_lexicon",
    "relation_policy",
    "general_records",
    "scene_records",
    "gcn_params",
)

TOP_LEVEL_KEYS = set(INPUT_FILES) | {
    "asset_root", "output_dir", "providers", "thresholds", "expansion", "retrieval", "logging",
}


def parse_overrides(tokens: Sequence[str]) -> List[Tuple[str, Any]]:
    """
    Turn ['--a.b', 'v', '--c=w'] into [('a.b', v), ('c', w)], values parsed as YAML scalars

    Raises:
        ConfigurationError: a token is not a --dotted.name flag or lacks a value
    """
    overrides = []
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--") or len(token) <= 2:
            raise ConfigurationError(f"Unexpected argument: {token}")
        name, sep, value = token[2:].partition("=")
        if not sep:
            if i + 1 >= len(tokens):
                raise ConfigurationError(f"Override {token} needs a value")
            value = tokens[i + 1]
            i += 1
        try:
            parsed = yaml.safe_load(value) if value != "" else ""
        except yaml.YAMLError:
            parsed = value
        overrides.append((name.replace("-", "_"), parsed))
        i += 1
    return overrides


def apply_overrides(data: Dict[str, Any], overrides: Iterable[Tuple[str, Any]]) -> Dict[str, Any]:
    """Set dotted keys in a copy of `data`, creating intermediate mappings as needed"""
    result = copy.deepcopy(data)
    for name, value in overrides:
        parts = name.split(".")
        if parts[0] not in TOP_LEVEL_KEYS:
            raise ConfigurationError(f"Unknown configuration field: {name}")
        node = result
        for part in parts[:-1]:
            child = node.get(part)
            if child is None:
                child = node[part] = {}
            if not isinstance(child, dict):
                raise ConfigurationError(f"Cannot override {name}: '{part}' is not a section")
            node = child
        node[parts[-1]] = value
    return result


@dataclass(frozen=True)
class PipelineConfig:
    """
    Everything one pipeline run needs

    Paths are absolute, resolved against the directory of the config file.
    """

    base_dir: Path
    output_dir: Path
    llm: ProviderConfig
    embedding: ProviderConfig
    files: Dict[str, Optional[Path]] = field(default_factory=dict)
    asset_root: Optional[Path] = None
    gamma1: float = 0.7
    gamma2: float = 0.7
    gamma3: float = 0.3
    max_depth: int = 2
    k: int = 3
    hops: int = 1
    log_level: str = "INFO"
    log_dir: Optional[Path] = None

    @classmethod
    def from_mapping(cls, data: Dict[str, Any], base_dir: Path) -> "PipelineConfig":
        unknown = set(data) - TOP_LEVEL_KEYS
        if unknown:
            raise ConfigurationError(f"Unknown configuration fields: {', '.join(sorted(unknown))}")

        def path(value: Any) -> Optional[Path]:
            if value in (None, ""):
                return None
            return (base_dir / str(value)).resolve()

        providers = data.get("providers") or {}
        if "llm" not in providers:
            raise ConfigurationError("Configuration needs providers.llm")
        llm = ProviderConfig.from_mapping(providers["llm"], base_dir).with_environment()
        embedding = ProviderConfig.from_mapping(providers.get("embedding") or providers["llm"],
                                                base_dir).with_environment()

        thresholds = data.get("thresholds") or {}
        expansion = data.get("expansion") or {}
        retrieval = data.get("retrieval") or {}
        logging_section = data.get("logging") or {}

        try:
            max_depth = int(expansion.get("max_depth", 2))
            k = int(retrieval.get("k", 3))
            hops = int(retrieval.get("hops", 1))
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"Invalid integer setting: {e}")
        if max_depth < 0 or k < 1 or hops < 0:
            raise ConfigurationError("expansion.max_depth and retrieval.hops must be >= 0, retrieval.k >= 1")

        try:
            gamma1 = check_threshold("thresholds.gamma1", thresholds.get("gamma1", 0.7))
            gamma2 = check_threshold("thresholds.gamma2", thresholds.get("gamma2", 0.7))
            gamma3 = check_threshold("thresholds.gamma3", thresholds.get("gamma3", 0.3), low=-1.0)
        except ContractError as e:
            raise ConfigurationError(str(e))

        return cls(
            base_dir=base_dir,
            output_dir=path(data.get("output_dir", "build")),
            llm=llm,
            embedding=embedding,
            files={name: path(data.get(name)) for name in INPUT_FILES},
            asset_root=path(data.get("asset_root")),
            gamma1=gamma1,
            gamma2=gamma2,
            gamma3=gamma3,
            max_depth=max_depth,
            k=k,
            hops=hops,
            log_level=str(os.environ.get(LOG_LEVEL_ENV_VAR) or logging_section.get("level", "INFO")),
            log_dir=path(logging_section.get("dir")),
        )

    @classmethod
    def from_file(cls, config_path: str, overrides: Iterable[Tuple[str, Any]] = ()) -> "PipelineConfig":
        data = apply_overrides(load_config(config_path), overrides)
        return cls.from_mapping(data, Path(config_path).resolve().parent)

    def require(self, *names: str) -> Dict[str, Path]:
        """
        Paths of the named input files, checked to exist

        Raises:
            ConfigurationError: a file is not configured or missing
        """
        resolved = {}
        for name in names:
            value = self.files.get(name)
            if value is None:
                raise ConfigurationError(f"Configuration field '{name}' is not set")
            if not value.is_file():
                raise ConfigurationError(f"File for '{name}' not found: {value}")
            resolved[name] = value
        return resolved

    @property
    def schema_path(self) -> Path:
        return self.output_dir / "schema.json"

    @property
    def graph_dir(self) -> Path:
        return self.output_dir / "graph"

    @property
    def refined_dir(self) -> Path:
        return self.output_dir / "refined"

    @property
    def report_path(self) -> Path:
        return self.output_dir / "qcr_report.json"

    @property
    def rejects_path(self) -> Path:
        return self.output_dir / "rejects.jsonl"
