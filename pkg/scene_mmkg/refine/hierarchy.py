# ABOUTME: Attribute hierarchicalization: split composite attributes like "frame length" into part + attribute
# ABOUTME: Lexicon-driven longest-match tokenization; parts link to the entity, attributes to the parts

from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .models import HierarchicalAttributeSet, PartLexicon, Subdivision


def _longest_matches(tokens: Sequence[Optional[str]], vocabulary: FrozenSet[str]) -> Tuple[List[str], List[int]]:
    """
    Greedy left-to-right longest match of token runs against `vocabulary`

    None tokens are barriers. Returns matched phrases in order of appearance
    and the indices of the tokens they consumed.
    """
    longest = max((len(v.split(" ")) for v in vocabulary), default=0)
    matches: List[str] = []
    consumed: List[int] = []
    i = 0
    while i < len(tokens):
        if tokens[i] is None:
            i += 1
            continue
        for width in range(min(longest, len(tokens) - i), 0, -1):
            window = tokens[i:i + width]
            if any(t is None for t in window):
                continue
            phrase = " ".join(window)
            if phrase in vocabulary:
                if phrase not in matches:
                    matches.append(phrase)
                consumed.extend(range(i, i + width))
                i += width
                break
        else:
            i += 1
    return matches, consumed


def subdivide(attribute: str, lexicon: PartLexicon) -> Optional[Subdivision]:
    """
    Split a composite attribute into parts and general attributes

    Returns:
        The Subdivision, or None when the attribute is not subdividable
        (no part or no general attribute found)
    """
    tokens: List[Optional[str]] = attribute.split()
    parts, consumed = _longest_matches(tokens, lexicon.parts)
    if not parts:
        return None
    used = set(consumed)
    remaining = [None if i in used else t for i, t in enumerate(tokens)]
    general, _ = _longest_matches(remaining, lexicon.general_attributes)
    if not general:
        return None
    return Subdivision(attribute=attribute, parts=tuple(parts), general=tuple(general))


def hierarchicalize(entity: str, attributes: Iterable[str], lexicon: PartLexicon) -> HierarchicalAttributeSet:
    """
    Attribute hierarchicalization for one entity

    Each subdividable attribute links its parts to the entity and each of its
    general attributes to every part it co-occurred with; other attributes stay
    directly on the entity.
    """
    direct = set()
    parts = set()
    pairs = set()
    origin: Dict[str, set] = {}

    def trace(element: str, source: str) -> None:
        origin.setdefault(element, set()).add(source)

    for attribute in sorted(set(attributes)):
        split = subdivide(attribute, lexicon)
        if split is None:
            direct.add(attribute)
            trace(f"direct:{attribute}", attribute)
            continue
        for part in split.parts:
            parts.add(part)
            trace(f"part:{part}", attribute)
            for general in split.general:
                pairs.add((part, general))
                trace(f"part_attribute:{part}/{general}", attribute)

    return HierarchicalAttributeSet(
        entity=entity,
        direct=tuple(sorted(direct)),
        parts=tuple(sorted(parts)),
        part_attributes=tuple(sorted(pairs)),
        origin={k: tuple(sorted(v)) for k, v in sorted(origin.items())},
    )
