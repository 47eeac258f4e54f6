# ABOUTME: Graph quality monitoring and validation shared by every pipeline stage
# ABOUTME: Collects referential, duplicate, alias and asset-checksum issues into one report

import logging
from collections import Counter
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from .utils import sha256_file


class GraphQualityChecker:
    """Data quality monitoring and validation for a Scene-MMKG"""

    def __init__(self, source_name: str, logger: Optional[logging.Logger] = None):
        self.source_name = source_name
        self.logger = logger or logging.getLogger(f"scene_mmkg.data_quality.{source_name}")
        self.quality_issues: List[str] = []

    def check_referential_integrity(self, graph) -> int:
        """
        Full scan for dangling heads, tails, concepts and alias targets

        Returns:
            Number of issues found
        """
        self.logger.info(f"Checking referential integrity of {len(graph)} triples")
        issues = graph.integrity_issues()
        self.quality_issues.extend(issues)
        return len(issues)

    def check_duplicate_triples(self, triples: Iterable) -> int:
        """
        Check for records sharing one (head, relation, tail) key

        Args:
            triples: Triple records, e.g. as read back from disk

        Returns:
            Number of duplicated keys
        """
        counts = Counter(t.key for t in triples)
        duplicates = sum(1 for n in counts.values() if n > 1)
        if duplicates:
            self.quality_issues.append(f"Found {duplicates} duplicated triple keys")
        return duplicates

    def check_alias_chains(self, graph) -> int:
        """Every alias attribute key must point at a canonical key"""
        keys = {k.id: k for k in graph.attribute_keys()}
        broken = 0
        for key in keys.values():
            if key.alias_of is None:
                continue
            target = keys.get(key.alias_of)
            if target is None or target.alias_of is not None:
                broken += 1
                self.quality_issues.append(f"Attribute alias '{key.name}' does not resolve to a canonical key")
        return broken

    def check_asset_checksums(self, graph, asset_root: Optional[Path] = None) -> Dict[str, bool]:
        """
        Compare stored checksums of locally available image files

        Assets whose file is not present locally are skipped.

        Returns:
            Dictionary of asset id to checksum match
        """
        results = {}
        for asset in graph.assets():
            path = Path(asset.uri)
            if asset_root is not None and not path.is_absolute():
                path = asset_root / path
            if not path.is_file():
                continue
            matches = sha256_file(path) == asset.checksum
            results[asset.id] = matches
            if not matches:
                self.quality_issues.append(f"Checksum mismatch for image asset {asset.uri}")
        return results

    def generate_quality_report(self) -> Dict[str, Any]:
        """
        Generate data quality report

        Returns:
            Dictionary containing quality assessment results
        """
        return {
            "source": self.source_name,
            "issues_found": len(self.quality_issues),
            "issues": list(self.quality_issues),
            "status": "PASS" if not self.quality_issues else "FAIL",
        }

    def log_quality_summary(self):
        """Log summary of data quality checks"""
        if self.quality_issues:
            self.logger.warning(f"Data quality issues found: {len(self.quality_issues)}")
            for issue in self.quality_issues:
                self.logger.warning(f"  - {issue}")
        else:
            self.logger.info("All data quality checks passed")


def run_basic_quality_checks(source_name: str, graph, asset_root: Optional[Path] = None) -> Dict[str, Any]:
    """
    Run basic quality checks for a graph

    Args:
        source_name: Name of the stage or graph being checked
        graph: The graph to check
        asset_root: Directory relative image URIs resolve against

    Returns:
        Quality report dictionary
    """
    checker = GraphQualityChecker(source_name)

    checker.check_referential_integrity(graph)
    checker.check_duplicate_triples(graph.triples())
    checker.check_alias_chains(graph)
    checker.check_asset_checksums(graph, asset_root)

    report = checker.generate_quality_report()
    report["counts"] = graph.stats()
    checker.log_quality_summary()

    return report
