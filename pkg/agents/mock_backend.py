import json
import logging
import re
from collections import Counter

from agents.backend import ChatBackend, prompt_hash
from agents.profiles import draw_profile_record
from agents.prompts import (TASK_ACTION, TASK_ACTIVATION, TASK_ITEMS, TASK_PROFILES, TASK_QUERIES, TASK_REFLECT,
                            prompt_headers)
from graph.bipartite import CORE
from graph.scenario import get_scenario, synthesize_item_attrs
from rng_streams import derive_rng
from srag.encoder import DEFAULT_DIM, hash_embed
from vocabulary import load_vocabulary

logger = logging.getLogger(__name__)

_COUNT = re.compile(r"list of (\d+)")
_TOPICS_LIST = re.compile(r"about these topics: (.+?)\.\s*$", re.MULTILINE)
_INTERESTS = re.compile(r"^(?:topics|genres): (.+)$", re.MULTILINE)
_TITLE = re.compile(r"^Title: (.+)$", re.MULTILINE)
_TWEET_ID = re.compile(r"^Tweet ID: (\d+)$", re.MULTILINE)


def _line_value(text, key):
    match = re.search(rf"^{key}:(.*)$", text, re.MULTILINE)
    return match.group(1).strip() if match else ""


def _split(value):
    return [v.strip() for v in value.split(",") if v.strip()]


class MockBackend(ChatBackend):
    """Canned, deterministic answers keyed by (seed, prompt hash); never touches the network."""

    def __init__(self, seed=0, exchange_log=None, embed_dim=DEFAULT_DIM):
        super().__init__(exchange_log)
        self.seed = seed
        self.embed_dim = embed_dim
        self._handlers = {
            TASK_PROFILES: self._profiles,
            TASK_ITEMS: self._items,
            TASK_ACTIVATION: self._activation,
            TASK_REFLECT: self._reflect,
            TASK_QUERIES: self._queries,
            TASK_ACTION: self._action,
        }

    def _complete(self, system, user):
        headers = prompt_headers(system)
        rng = derive_rng(self.seed, int(prompt_hash(system, user)[:15], 16))
        handler = self._handlers.get(headers.get("Task"))
        if handler is None:
            return "OK"
        return handler(headers.get("Scenario", "SC"), user, rng)

    def embed(self, texts):
        return [hash_embed(t, self.embed_dim) for t in texts]

    def _profiles(self, scenario, user, rng):
        match = _COUNT.search(user)
        count = int(match.group(1)) if match else 1
        return json.dumps([draw_profile_record(scenario, rng) for _ in range(count)], ensure_ascii=False)

    def _items(self, scenario, user, rng):
        spec = get_scenario(scenario)
        match = _COUNT.search(user)
        count = int(match.group(1)) if match else 1
        found = _TOPICS_LIST.search(user)
        topics = _split(found.group(1)) if found else list(load_vocabulary(spec.topic_vocab))
        records = []
        for serial in range(count):
            topic = topics[int(rng.integers(len(topics)))]
            records.append(synthesize_item_attrs(spec, rng, topic, None, 0, serial))
        return json.dumps(records, ensure_ascii=False)

    def _activation(self, scenario, user, rng):
        p = 0.8 if _line_value(user, "Label") == CORE else 0.2
        return "active" if rng.random() < p else "idle"

    def _reflect(self, scenario, user, rng):
        topics = [t for t in re.findall(r"topic=(\S+)", user) if t != "-"]
        keywords = [t for t, _ in Counter(topics).most_common(3)] or _split(_line_value(user, "Interests"))[:3]
        summary = f"Recently busy with {', '.join(keywords)}." if keywords else "Nothing done yet."
        return f"Summary: {summary}\nKeywords: {', '.join(keywords)}"

    def _queries(self, scenario, user, rng):
        return json.dumps(_split(_line_value(user, "Keywords")), ensure_ascii=False)

    def _pick(self, rng, candidates, limit=3):
        if not candidates:
            return []
        size = min(limit, len(candidates), int(rng.integers(1, limit + 1)))
        picks = sorted(rng.choice(len(candidates), size=size, replace=False))
        return [candidates[int(i)] for i in picks]

    def _action(self, scenario, user, rng):
        spec = get_scenario(scenario)
        interests = _INTERESTS.search(user)
        pool = _split(interests.group(1)) if interests else []
        pool = pool or list(load_vocabulary(spec.topic_vocab))
        topic = pool[int(rng.integers(len(pool)))]

        if scenario == "TC":
            ratings = [{"movie": t, "rating": int(rng.integers(1, 6))} for t in self._pick(rng, _TITLE.findall(user))]
            return json.dumps({"ratings": ratings}, ensure_ascii=False)

        if scenario == "SoC":
            kinds = ("Retweet", "Reply", "Follow")
            actions = [{"action": kinds[int(rng.integers(3))], "tweet_id": int(t)}
                       for t in self._pick(rng, _TWEET_ID.findall(user))]
            tweet = synthesize_item_attrs(spec, rng, topic, None, 0, 0)["tweet"] if rng.random() < 0.5 else ""
            return json.dumps({"actions": actions, "tweet": tweet, "topic": topic}, ensure_ascii=False)

        attrs = synthesize_item_attrs(spec, rng, topic, None, 0, int(rng.integers(1_000_000)))
        reply = {"title": attrs["title"], "keywords": [topic], "abstract": attrs["abstract"],
                 "citations": self._pick(rng, _TITLE.findall(user))}
        return json.dumps(reply, ensure_ascii=False)
