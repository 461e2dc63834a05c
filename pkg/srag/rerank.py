from dataclasses import dataclass, field

from errors import ConfigError


def rerank_coarse(results, core_flags):
    """Stable partition: items created by Core actors first. `core_flags` maps ordinal -> bool;
    absent items (seed items without a creator) count as Regular."""
    core = [o for o in results if core_flags.get(o, False)]
    rest = [o for o in results if not core_flags.get(o, False)]
    return core + rest


@dataclass
class PreferenceContext:
    topics: frozenset = frozenset()           # actor interests, casefolded
    followees: frozenset = frozenset()        # actor ordinals this actor follows
    friends: frozenset = frozenset()          # mutual follows
    item_topics: dict = field(default_factory=dict)
    item_creators: dict = field(default_factory=dict)


def _topic_match(ordinal, prefs):
    return any(t.casefold() in prefs.topics for t in prefs.item_topics.get(ordinal, ()))


def _creator_in(group):
    def predicate(ordinal, prefs):
        creator = prefs.item_creators.get(ordinal)
        return creator is not None and creator in getattr(prefs, group)
    return predicate


PREDICATES = {
    "topic": _topic_match,
    "genre": _topic_match,
    "follow": _creator_in("followees"),
    "friend": _creator_in("friends"),
}


def preference_score(ordinal, prefs, filters):
    return sum(1 for name in filters if PREDICATES[name](ordinal, prefs))


def rerank_fine(results, prefs, filter_items, n_f, core_flags=None):
    """Stable sort by how many of the first n_f filters an item satisfies. With `core_flags` the
    Core/Regular partition from the coarse stage is kept."""
    if n_f < 0 or n_f > len(filter_items):
        raise ConfigError(f"n_f must lie in [0, {len(filter_items)}], got {n_f}")
    filters = filter_items[:n_f]
    unknown = [name for name in filters if name not in PREDICATES]
    if unknown:
        raise ConfigError(f"unknown filter items {unknown}")
    if not filters:
        return list(results)

    def key(ordinal):
        group = 0 if core_flags is None or core_flags.get(ordinal, False) else 1
        return (group, -preference_score(ordinal, prefs, filters))

    return sorted(results, key=key)
