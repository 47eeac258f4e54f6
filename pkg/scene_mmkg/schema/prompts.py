# ABOUTME: Prompt construction from scene profiles and parsing of LLM candidate lists
# ABOUTME: Templates carry a scene slot {S} and a profile slot {W}, each exactly once

import re
from typing import Iterable, List

from ..shared.exceptions import TemplateError
from ..shared.utils import normalize_label, slugify
from .models import SceneProfile

SCENE_SLOT = "{S}"
PROFILE_SLOT = "{W}"

_SLOT = re.compile(r"\{[SW]\}")
_SPLIT = re.compile(r"[\n,]")
_LIST_MARKER = re.compile(r"^(?:[-*+•·]+|\(?\d+[.):])\s*")
_QUOTES = "\"'`“”‘’"


def validate_template(template: str) -> None:
    for slot in (SCENE_SLOT, PROFILE_SLOT):
        found = template.count(slot)
        if found != 1:
            raise TemplateError(f"Template must contain {slot} exactly once, found {found}")


def prompt_key(scene: str, index: int) -> str:
    """Fixture lookup key for the prompt built from profile `index`"""
    return f"{slugify(scene)}-profile-{index}"


def build_prompt(profile: SceneProfile, template: str) -> List[str]:
    """
    One prompt per profile entry, in profile order

    Both slots are filled in one pass, so slot markers inside the scene name
    or a profile text stay literal.

    Raises:
        TemplateError: a slot is missing or repeated
    """
    validate_template(template)

    def fill(profile_text: str) -> str:
        values = {SCENE_SLOT: profile.scene, PROFILE_SLOT: profile_text}
        return _SLOT.sub(lambda match: values[match.group(0)], template)

    return [fill(profile_text) for profile_text in profile.profiles]


def parse_candidates(outputs: Iterable[str]) -> List[str]:
    """
    Split raw completions into normalized concept labels

    Outputs are split on newlines and commas; bullet and number markers, wrapping
    quotes and trailing periods are stripped. First occurrence wins.
    """
    labels: List[str] = []
    seen = set()
    for output in outputs:
        for piece in _SPLIT.split(output):
            text = _LIST_MARKER.sub("", piece.strip())
            text = text.strip().strip(_QUOTES + ". ")
            label = normalize_label(text)
            if label is None or label in seen:
                continue
            seen.add(label)
            labels.append(label)
    return labels
