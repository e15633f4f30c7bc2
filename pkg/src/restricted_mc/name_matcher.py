"""Fuzzy "did you mean" suggestions for unknown suite, family, strategy and bound names."""

from __future__ import annotations

from collections.abc import Iterable

from fuzzywuzzy import fuzz, process

from restricted_mc.models import NameSuggestion


def get_confidence_level(score: int) -> str:
    """Determine confidence level based on match score.

    Args:
        score: Match score (0-100)

    Returns:
        Confidence level string
    """
    if score >= 90:
        return "Very High"
    if score >= 80:
        return "High"
    return "Medium"


def suggest_names(
    requested: str,
    known: Iterable[str],
    threshold: int = 60,
    limit: int = 3,
) -> list[NameSuggestion]:
    """Find registered names similar to an unknown one.

    Args:
        requested: The name that failed to resolve
        known: Registered names
        threshold: Minimum match score (0-100)
        limit: Maximum number of suggestions

    Returns:
        Suggestions ordered by descending score, then name
    """
    choices = sorted(set(known))
    if not requested or not choices:
        return []
    # fuzzywuzzy returns (choice, score) tuples for list choices
    matches = process.extract(requested, choices, scorer=fuzz.ratio, limit=limit)  # type: ignore[assignment]
    suggestions: list[NameSuggestion] = []
    for match in matches:
        candidate = str(match[0])
        score = int(match[1])
        if score >= threshold:
            suggestions.append(
                NameSuggestion(
                    requested=requested,
                    candidate=candidate,
                    match_score=score,
                    confidence=get_confidence_level(score),
                )
            )
    suggestions.sort(key=lambda s: (-s["match_score"], s["candidate"]))
    return suggestions


def unknown_name_message(kind: str, requested: str, known: Iterable[str]) -> str:
    """Build the error message for an unknown name, with suggestions when any are close.

    Args:
        kind: What was looked up (e.g. "suite")
        requested: The name that failed to resolve
        known: Registered names

    Returns:
        Message listing close matches or, failing that, every valid name
    """
    names = sorted(set(known))
    suggestions = suggest_names(requested, names)
    if suggestions:
        hint = ", ".join(f"'{s['candidate']}' ({s['confidence']})" for s in suggestions)
        return f"Unknown {kind} '{requested}'. Did you mean: {hint}?"
    return f"Unknown {kind} '{requested}'. Valid names: {', '.join(names)}"
