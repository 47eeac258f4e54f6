"""Scene-driven multimodal knowledge graph construction and retrieval.

Stages: ``schema`` (prompt-based concept schema), ``populate`` (general and
scene knowledge ingest), ``refine`` (quality control & refinement) and ``skr``
(scene knowledge retrieval), all over the ``kgcore`` graph store. Model access
goes through ``providers``.
"""

__version__ = "0.1.0"
