import dataclasses
import logging
import os
import re
from collections import Counter
from dataclasses import dataclass
from typing import Optional

from errors import ConfigError, InvalidParams, MissingRequiredAttr
from graph.bipartite import BipartiteGraph, actor_id, load_graph
from graph.folding import fold
from rng_streams import SEED_GRAPH, derive_rng
from vocabulary import load_vocabulary

logger = logging.getLogger(__name__)

TEMPLATE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "templates")
SLOT_PATTERN = re.compile(r"\{\{\s*(\w+)\s*\}\}")

SYNTHETIC = "synthetic"
LLM_GENERATED = "llm-generated"


def load_template(name, override_path=None):
    if override_path:
        if os.path.exists(override_path):
            with open(override_path, "r", encoding="utf-8") as f:
                return f.read()
        logger.warning(f"⚠️ template override {override_path} not found. Using built-in {name}.")
    with open(os.path.join(TEMPLATE_DIR, f"{name}.txt"), "r", encoding="utf-8") as f:
        return f.read()


def template_slots(template):
    return list(dict.fromkeys(SLOT_PATTERN.findall(template)))


def fill_template(template, slots):
    def replace(match):
        name = match.group(1)
        if name not in slots:
            raise MissingRequiredAttr(f"template slot '{name}' has no value")
        return str(slots[name])
    return SLOT_PATTERN.sub(replace, template)


@dataclass(frozen=True)
class Termination:
    kind: str                      # "rounds" | "nodes" | "edges"
    count: int
    fold: Optional[str] = None


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    actor_type: str
    item_type: str
    action_kinds: tuple
    creation_kind: Optional[str]
    item_template: str
    profile_template: str
    action_template: str
    filter_items: tuple
    fold_specs: tuple
    termination: Termination
    profiles_per_round: int
    edge_features: bool
    topic_attr: str
    topic_vocab: str
    activation: tuple              # (mode, count); count None means "scenario decides"
    cite_fraction: float = 0.3
    create_probability: float = 0.5
    seed_creators: bool = False    # seed items credited to seed actors

    @property
    def interaction_kinds(self):
        return tuple(k for k in self.action_kinds if k != self.creation_kind)

    @property
    def required_attrs(self):
        return tuple(slot for slot in template_slots(self.item_template) if slot != "id")

    @property
    def headline_attr(self):
        """The attribute naming an item in memories and digests."""
        for name in ("title", "tweet"):
            if name in self.required_attrs:
                return name
        return self.required_attrs[0] if self.required_attrs else None

    def new_graph(self):
        return BipartiteGraph(self.action_kinds, self.required_attrs)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def builtin_scenarios(templates=None):
    templates = templates or {}

    def t(name):
        return load_template(name, templates.get(name))

    return {
        "SC": ScenarioSpec(
            name="SC", actor_type="author", item_type="paper",
            action_kinds=("Creation", "Citation"), creation_kind="Creation",
            item_template=t("sc_item"), profile_template=t("sc_profile"), action_template=t("sc_action"),
            filter_items=("topic",),
            fold_specs=("PaperCitation", "BibCoupling", "CoCitation", "AuthorCitation", "CoAuthorship"),
            termination=Termination("nodes", 10_000, "PaperCitation"),
            profiles_per_round=30, edge_features=True, topic_attr="topic", topic_vocab="topics",
            activation=("random", 50), cite_fraction=0.3, create_probability=1.0,
        ),
        "TC": ScenarioSpec(
            name="TC", actor_type="watcher", item_type="movie",
            action_kinds=("Rating",), creation_kind=None,
            item_template=t("tc_item"), profile_template=t("tc_profile"), action_template=t("tc_action"),
            filter_items=("genre",),
            fold_specs=("MovieRating", "UserProjection"),
            termination=Termination("edges", 100_000, "MovieRating"),
            profiles_per_round=25, edge_features=False, topic_attr="genres", topic_vocab="genres",
            activation=("all", None), cite_fraction=0.3, create_probability=0.0,
        ),
        "SoC": ScenarioSpec(
            name="SoC", actor_type="user", item_type="tweet",
            action_kinds=("Tweet", "Retweet", "Reply", "Follow"), creation_kind="Tweet",
            item_template=t("soc_item"), profile_template=t("soc_profile"), action_template=t("soc_action"),
            filter_items=("follow", "topic", "friend"),
            fold_specs=("Action", "Follow", "Friend"),
            termination=Termination("rounds", 5),
            profiles_per_round=25, edge_features=False, topic_attr="topic", topic_vocab="social_topics",
            activation=("core_regular", None), cite_fraction=0.3, create_probability=0.5,
            seed_creators=True,
        ),
    }


def get_scenario(name, templates=None):
    scenarios = builtin_scenarios(templates)
    if name not in scenarios:
        raise ConfigError(f"unknown scenario '{name}', expected one of {list(scenarios)}")
    return scenarios[name]


def item_topics(attrs, spec):
    value = str(attrs.get(spec.topic_attr, "") or "")
    return [token.strip() for token in re.split(r"[|,]", value) if token.strip()]


def render_item_text(item, spec, edges=()):
    slots = {"id": item.id.ordinal}
    for name in spec.required_attrs:
        value = item.attrs.get(name)
        if value is None or not str(value).strip():
            raise MissingRequiredAttr(f"{spec.item_type} {item.id} lacks '{name}'")
        slots[name] = value
    text = fill_template(spec.item_template, slots).rstrip("\n")
    if spec.edge_features and edges:
        creators = [str(e.actor) for e in edges if e.kind == spec.creation_kind]
        kinds = Counter(e.kind for e in edges if e.kind != spec.creation_kind)
        if creators:
            text += "\nAuthors: " + ", ".join(creators)
        if kinds:
            text += "\nInteractions: " + ", ".join(f"{k} x{n}" for k, n in kinds.items())
    return text


def check_termination(graph, spec, termination=None):
    rule = termination or spec.termination
    if rule.kind == "rounds":
        return graph.current_round >= rule.count
    folded = fold(graph, rule.fold)
    if rule.kind == "nodes":
        return folded.number_of_nodes() >= rule.count
    if rule.kind == "edges":
        return folded.number_of_edges() >= rule.count
    raise ConfigError(f"unknown termination kind '{rule.kind}'")


def synthesize_item_attrs(spec, rng, topic, author, round, serial):
    words = load_vocabulary("words")
    w = [words[i] for i in rng.integers(len(words), size=4)]
    if spec.name == "SC":
        return {
            "title": f"{topic} {w[0]} {w[1]} {round}-{serial}",
            "topic": topic,
            "abstract": f"We present a {w[2]} for {topic} and report {w[3]} on several tasks.",
        }
    if spec.name == "TC":
        genres = load_vocabulary("genres")
        second = genres[int(rng.integers(len(genres)))]
        listed = [topic] if second == topic else [topic, second]
        return {
            "title": f"The {w[0].title()} {w[1].title()} {round}-{serial}",
            "genres": "|".join(listed),
            "content": f"A {topic.lower()} story of {w[2]} and {w[3]}.",
        }
    if spec.name == "SoC":
        return {
            "user": author or "anonymous",
            "tweet": f"{w[0]} {topic} {w[1]} #{topic}",
            "topic": topic,
        }
    attrs = {name: f"{topic} {w[0]} {w[1]}" for name in spec.required_attrs}
    attrs.setdefault(spec.topic_attr, topic)
    return attrs


def _synthetic_seed(spec, actors, items, edges, seed):
    from agents.profiles import generate_profiles

    if edges and (actors == 0 or items == 0):
        raise InvalidParams("a synthetic seed with edges needs at least one actor and one item")
    rng = derive_rng(seed, SEED_GRAPH)
    graph = spec.new_graph()
    profiles = generate_profiles(None, spec, actors, rng)
    for profile in profiles:
        graph.add_actor(profile.to_text(), 0, attrs=profile.as_attrs())
    topics = load_vocabulary(spec.topic_vocab)
    for serial in range(items):
        creator = None
        if spec.seed_creators and actors:
            creator = actor_id(rng.integers(actors))
        interests = profiles[creator.ordinal].interests() if creator is not None else []
        pool = interests or topics
        topic = pool[int(rng.integers(len(pool)))]
        author = profiles[creator.ordinal].name if creator is not None else None
        graph.add_item(synthesize_item_attrs(spec, rng, topic, author, 0, serial), creator, 0)
    kinds = spec.interaction_kinds
    for _ in range(edges):
        a = int(rng.integers(actors))
        i = int(rng.integers(items))
        kind = kinds[int(rng.integers(len(kinds)))]
        graph.add_edge(graph.actors[a].id, graph.items[i].id, kind, 0)
    logger.info(f"Synthetic {spec.name} seed: {actors} actors, {items} items, {edges} edges (seed={seed})")
    return graph


def _llm_seed(spec, backend, actors, items, seed):
    from agents.profiles import generate_profiles
    from agents.llm_policy import generate_items

    if backend is None:
        raise ConfigError("an llm-generated seed needs a backend")
    rng = derive_rng(seed, SEED_GRAPH)
    graph = spec.new_graph()
    for profile in generate_profiles(backend, spec, actors, rng):
        graph.add_actor(profile.to_text(), 0, attrs=profile.as_attrs())
    for attrs in generate_items(backend, spec, items):
        graph.add_item(attrs, None, 0)
    logger.info(f"LLM-generated {spec.name} seed: {len(graph.actors)} actors, {len(graph.items)} items")
    return graph


def load_seed(source, spec, backend=None, actors=10, items=50, edges=80, seed=7):
    if source == SYNTHETIC:
        return _synthetic_seed(spec, actors, items, edges, seed)
    if source == LLM_GENERATED:
        return _llm_seed(spec, backend, actors, items, seed)
    if not os.path.isdir(source):
        raise ConfigError(f"seed source '{source}' is neither a keyword nor a directory")
    return load_graph(source, spec.action_kinds, spec.required_attrs)
