import copy
import json
import logging
from dataclasses import dataclass, field
from typing import Optional

from agents.activation import ActivationPolicy
from agents.backend import BackendConfig
from errors import ConfigError
from graph.scenario import SYNTHETIC, Termination, get_scenario
from srag.interaction import SragConfig

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = {
    "scenario": "SC",
    "seed": SYNTHETIC,
    "seed_size": {"actors": 10, "items": 50, "edges": 80},
    "rounds": 10,
    "rng_seed": 7,
    "profiles_per_round": None,
    "activation": {
        "mode": None,
        "count": None,
        "hub_rate": 0.2,
        "p_core": 0.8,
        "p_regular": 0.2,
        "use_llm": False,
    },
    "srag": {
        "n_r": 10,
        "n_f": 1,
        "rerank_enabled": True,
        "embed_dim": 384,
        "max_queries": 3,
        "encoder": "hashing",
        "filter_items": None,
    },
    "policy": {
        "kind": "heuristic",
        "cite_fraction": None,
        "create_probability": None,
        "memory_window": 20,
        "keywords": 3,
        "max_retries": 2,
    },
    "backend": {
        "kind": "mock",
        "seed": 0,
        "base_url": "",
        "model": "",
        "embed_model": "",
        "timeout_ms": 60000,
        "max_retries": 2,
        "backoff_ms": 500,
        "max_in_flight": 8,
        "replay_path": None,
    },
    "ports": 1,
    "injected_latency_ms": 0,
    "out_dir": "runs/latest",
    "termination": None,
    "sc": {"active_agents": None, "papers_target": 50},
    "folds": None,
    "templates": {},
}


def deep_merge(base, override):
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config(path):
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except ValueError as e:
            raise ConfigError(f"{path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    logger.info(f"Loaded run config from {path}")
    return data


def apply_override(config, assignment):
    """`dotted.key=value`; the value is read as JSON when it parses, else kept as a string."""
    key, sep, raw = assignment.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override '{assignment}' is not of the form key=value")
    try:
        value = json.loads(raw)
    except ValueError:
        value = raw
    return set_key(config, key.strip(), value)


def set_key(config, dotted, value):
    node = config
    parts = dotted.split(".")
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            node[part] = {}
        node = node[part]
    node[parts[-1]] = value
    return config


@dataclass(frozen=True)
class SimConfig:
    scenario: object
    seed_source: str
    seed_size: dict
    rounds: int
    rng_seed: int
    activation: ActivationPolicy
    profiles_per_round: int
    srag: SragConfig
    policy_kind: str
    policy: dict
    backend: BackendConfig
    ports: int
    injected_latency_ms: float
    out_dir: str
    termination: Optional[Termination]
    papers_target: Optional[int]
    folds: Optional[list]
    raw: dict = field(default_factory=dict)


def _hub_rate_alias(raw):
    """`srag.hub_rate` is accepted as a spelling of `activation.hub_rate`, which wins when both are set."""
    srag = (raw or {}).get("srag") or {}
    if "hub_rate" not in srag:
        return raw
    raw = copy.deepcopy(raw)
    hub_rate = raw["srag"].pop("hub_rate")
    raw.setdefault("activation", {}).setdefault("hub_rate", hub_rate)
    return raw


def _activation(raw, spec):
    section = raw["activation"]
    mode = section.get("mode") or spec.activation[0]
    count = section.get("count")
    if count is None and spec.name == "SC":
        count = raw["sc"].get("active_agents")
    if count is None:
        count = spec.activation[1]
    return ActivationPolicy(
        mode=mode,
        count=None if count is None else int(count),
        hub_rate=float(section.get("hub_rate", 0.2)),
        p_core=float(section.get("p_core", 0.8)),
        p_regular=float(section.get("p_regular", 0.2)),
        use_llm=bool(section.get("use_llm", False)),
    )


def _termination(raw):
    rule = raw.get("termination")
    if not rule:
        return None
    kind = rule.get("kind")
    if kind not in ("rounds", "nodes", "edges"):
        raise ConfigError(f"termination kind must be rounds, nodes or edges, got {kind!r}")
    if kind != "rounds" and not rule.get("fold"):
        raise ConfigError(f"a {kind} termination needs a fold")
    return Termination(kind, int(rule.get("count", 0)), rule.get("fold"))


def resolve_config(raw):
    """Typed configuration from a merged config dict (defaults < file < flags)."""
    raw = deep_merge(DEFAULT_CONFIG, _hub_rate_alias(raw))
    spec = get_scenario(raw["scenario"], raw.get("templates") or None)
    activation = _activation(raw, spec)

    srag_section = raw["srag"]
    filters = srag_section.get("filter_items")
    srag = SragConfig(
        n_r=int(srag_section["n_r"]),
        n_f=int(srag_section["n_f"]),
        rerank_enabled=bool(srag_section["rerank_enabled"]),
        max_queries=int(srag_section["max_queries"]),
        embed_dim=int(srag_section["embed_dim"]),
        encoder=srag_section["encoder"],
        filter_items=tuple(filters) if filters is not None else None,
    ).validate(spec)

    policy = raw["policy"]
    if policy["kind"] not in ("heuristic", "llm"):
        raise ConfigError(f"policy kind must be heuristic or llm, got {policy['kind']!r}")

    ports = int(raw["ports"])
    rounds = int(raw["rounds"])
    latency = float(raw["injected_latency_ms"])
    if ports < 1:
        raise ConfigError(f"ports must be >= 1, got {ports}")
    if rounds < 1:
        raise ConfigError(f"rounds must be >= 1, got {rounds}")
    if latency < 0:
        raise ConfigError(f"injected_latency_ms must be >= 0, got {latency}")

    profiles = raw.get("profiles_per_round")
    papers_target = raw["sc"].get("papers_target") if spec.name == "SC" else None
    return SimConfig(
        scenario=spec,
        seed_source=raw["seed"],
        seed_size=dict(raw["seed_size"]),
        rounds=rounds,
        rng_seed=int(raw["rng_seed"]),
        activation=activation,
        profiles_per_round=spec.profiles_per_round if profiles is None else int(profiles),
        srag=srag,
        policy_kind=policy["kind"],
        policy=policy,
        backend=BackendConfig.from_dict(raw["backend"]),
        ports=ports,
        injected_latency_ms=latency,
        out_dir=raw["out_dir"],
        termination=_termination(raw),
        papers_target=None if papers_target is None else int(papers_target),
        folds=raw.get("folds"),
        raw=raw,
    )
