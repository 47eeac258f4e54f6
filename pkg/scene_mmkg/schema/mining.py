# ABOUTME: Raw scene concept mining: one LLM prompt per scene profile, candidates unioned by label
# ABOUTME: Provider calls fan out on a thread pool and merge back in prompt order

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional

from ..providers import resolve_provider
from .models import Concept, ConceptStage, Provenance, SceneProfile
from .prompts import build_prompt, parse_candidates, prompt_key

logger = logging.getLogger(__name__)

DEFAULT_MAX_WORKERS = 4


def mine_concepts(profile: SceneProfile, template: str, provider,
                  max_workers: Optional[int] = DEFAULT_MAX_WORKERS) -> List[Concept]:
    """
    Collect the raw concept set C_raw of a scene

    Args:
        profile: Scene name and profiles
        template: Prompt template with {S} and {W} slots
        provider: ProviderConfig or completion provider handle
        max_workers: Concurrent provider calls; 1 runs sequentially

    Returns:
        Raw concepts sorted by label, each with the index of the first prompt that produced it
    """
    provider = resolve_provider(provider)
    prompts = build_prompt(profile, template)
    keys = [prompt_key(profile.scene, i) for i in range(len(prompts))]

    def ask(index: int) -> List[str]:
        return provider.complete(prompts[index], key=keys[index])

    workers = max(1, min(max_workers or 1, len(prompts)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outputs = list(pool.map(ask, range(len(prompts))))

    concepts: Dict[str, Concept] = {}
    for index, output in enumerate(outputs):
        for label in parse_candidates(output):
            if label not in concepts:
                concepts[label] = Concept.create(label, ConceptStage.RAW, Provenance.prompt(index))

    if not concepts:
        logger.warning(f"No concepts mined for scene '{profile.scene}'")
    else:
        logger.info(f"Mined {len(concepts)} raw concepts from {len(prompts)} prompts")
    return [concepts[label] for label in sorted(concepts)]
