# ABOUTME: Shared utilities package for all pipeline stages
# ABOUTME: Provides common config, logging, hashing and graph quality functionality

from .utils import (
    load_config,
    load_json,
    setup_logging,
    normalize_label,
    slugify,
    stable_id,
    sha256_bytes,
    sha256_file,
    canonical_json,
    write_json,
    atomic_directory,
    atomic_file,
)
from .data_quality import GraphQualityChecker, run_basic_quality_checks

__all__ = [
    'load_config',
    'load_json',
    'setup_logging',
    'normalize_label',
    'slugify',
    'stable_id',
    'sha256_bytes',
    'sha256_file',
    'canonical_json',
    'write_json',
    'atomic_directory',
    'atomic_file',
    'GraphQualityChecker',
    'run_basic_quality_checks',
]
