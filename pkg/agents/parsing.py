import ast
import json
import logging
import re
from dataclasses import dataclass, field
from typing import Optional

from errors import ParseError

logger = logging.getLogger(__name__)


@dataclass
class ActionSet:
    new_item: Optional[dict] = None
    targets: list = field(default_factory=list)     # [(item ordinal, action kind)]
    warnings: int = 0


@dataclass(frozen=True)
class ActionSchema:
    scenario: str
    required: tuple
    targets_field: str


SCHEMAS = {
    "SC": ActionSchema("SC", ("title", "abstract"), "citations"),
    "TC": ActionSchema("TC", (), "ratings"),
    "SoC": ActionSchema("SoC", (), "actions"),
}

SOCIAL_ACTIONS = ("Retweet", "Reply", "Follow")


def _block(text, opening, closing):
    start = text.find(opening)
    end = text.rfind(closing)
    if start < 0 or end <= start:
        return None
    return text[start:end + 1]


def load_structured(text, opening="{", closing="}"):
    """JSON first, then Python literal syntax; nothing is ever executed."""
    block = _block(text or "", opening, closing)
    if block is None:
        raise ParseError(f"no {opening}...{closing} block in response")
    try:
        return json.loads(block)
    except ValueError:
        pass
    try:
        return ast.literal_eval(block)
    except (ValueError, SyntaxError, MemoryError, RecursionError) as e:
        raise ParseError(f"unreadable structured block: {e}")


def parse_profile_list(text):
    records = load_structured(text, "[", "]")
    if not isinstance(records, list) or not all(isinstance(r, dict) for r in records):
        raise ParseError("expected a list of profile objects")
    return records


def parse_string_list(text):
    values = load_structured(text, "[", "]")
    if not isinstance(values, list):
        raise ParseError("expected a list of strings")
    return [str(v).strip() for v in values if str(v).strip()]


def parse_keywords(text):
    summary, keywords = "", []
    for line in (text or "").splitlines():
        key, _, value = line.partition(":")
        if key.strip().lower() == "summary":
            summary = value.strip()
        elif key.strip().lower() == "keywords":
            keywords = [k.strip() for k in value.split(",") if k.strip()]
    return summary, keywords


def normalize_title(title):
    return " ".join(str(title).casefold().split())


def resolve_title(name, candidates):
    """Exact match first, then case/space-folded; first hit in observation order wins."""
    for ordinal, title in candidates:
        if title == name:
            return ordinal
    folded = normalize_title(name)
    for ordinal, title in candidates:
        if normalize_title(title) == folded:
            return ordinal
    return None


def _as_list(value):
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    raise ParseError(f"expected a list, got {type(value).__name__}")


def _add_target(actions, ordinal, kind):
    if ordinal is None:
        actions.warnings += 1
    elif (ordinal, kind) not in actions.targets:
        actions.targets.append((ordinal, kind))


def parse_action(text, schema, observation):
    data = load_structured(text)
    if not isinstance(data, dict):
        raise ParseError("expected a JSON object")
    for name in schema.required:
        if not isinstance(data.get(name), str) or not data[name].strip():
            raise ParseError(f"field '{name}' missing or empty")

    titles = [(o, observation.attrs[o].get("title", "")) for o in observation.items]
    actions = ActionSet()

    if schema.scenario == "SC":
        keywords = [str(k) for k in _as_list(data.get("keywords"))]
        actions.new_item = {
            "title": data["title"].strip(),
            "topic": keywords[0] if keywords else "general",
            "abstract": data["abstract"].strip(),
        }
        for name in _as_list(data.get("citations")):
            _add_target(actions, resolve_title(str(name), titles), "Citation")

    elif schema.scenario == "TC":
        for entry in _as_list(data.get("ratings")):
            if isinstance(entry, dict):
                name = entry.get("movie") or entry.get("title") or ""
            elif isinstance(entry, (list, tuple)) and entry:
                name = entry[0]
            else:
                raise ParseError(f"unreadable rating entry {entry!r}")
            _add_target(actions, resolve_title(str(name), titles), "Rating")

    elif schema.scenario == "SoC":
        for entry in _as_list(data.get("actions")):
            if not isinstance(entry, dict):
                raise ParseError(f"unreadable action entry {entry!r}")
            kind = str(entry.get("action", "")).strip().title()
            if kind not in SOCIAL_ACTIONS:
                actions.warnings += 1
                continue
            ordinal = _resolve_tweet(entry, observation)
            _add_target(actions, ordinal, kind)
        tweet = str(data.get("tweet") or "").strip()
        if tweet:
            actions.new_item = {"tweet": tweet, "topic": str(data.get("topic") or "").strip() or "general"}

    else:
        raise ParseError(f"no action schema for scenario '{schema.scenario}'")

    if actions.warnings:
        logger.warning(f"Dropped {actions.warnings} action target(s) naming unobserved items")
    return actions


def _resolve_tweet(entry, observation):
    raw = entry.get("tweet_id", entry.get("id"))
    if raw is not None:
        match = re.search(r"\d+", str(raw))
        if match and int(match.group()) in observation.items:
            return int(match.group())
        return None
    text = str(entry.get("tweet", ""))
    tweets = [(o, observation.attrs[o].get("tweet", "")) for o in observation.items]
    return resolve_title(text, tweets) if text else None
