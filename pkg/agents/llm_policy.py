import logging

from agents.memory import reflect
from agents.parsing import SCHEMAS, load_structured, parse_action, parse_string_list
from agents.policy import AgentPolicy
from agents.prompts import (REPAIR_SUFFIX, TASK_ACTION, TASK_ACTIVATION, TASK_ITEMS, TASK_QUERIES, activation_prompt,
                            items_prompt, queries_prompt, system_prompt)
from errors import ConfigError, ParseError
from graph.scenario import fill_template
from vocabulary import load_vocabulary

logger = logging.getLogger(__name__)


def chat_with_repair(backend, system, user, parse, max_retries):
    """Ask, parse, and on ParseError ask again with the repair suffix."""
    for attempt in range(max_retries + 1):
        text = backend.chat(system, user if attempt == 0 else user + REPAIR_SUFFIX)
        try:
            return parse(text)
        except ParseError as e:
            if attempt == max_retries:
                raise
            logger.warning(f"Unreadable {prompt_task(system)} response (attempt {attempt + 1}): {e}")


def prompt_task(system):
    return system.split("\n", 1)[0].removeprefix("Task: ")


class LlmPolicy(AgentPolicy):
    def __init__(self, spec, backend, max_retries=2, **kwargs):
        super().__init__(spec, **kwargs)
        if spec.name not in SCHEMAS:
            raise ConfigError(f"no response schema for scenario '{spec.name}'")
        self.backend = backend
        self.max_retries = max_retries
        self.schema = SCHEMAS[spec.name]

    def reflect(self, profile, memory, context):
        return reflect(memory, self.backend, self.memory_window, profile, self.keywords, self.spec.name)

    def make_queries(self, profile, memory, context, reflection):
        system = system_prompt(TASK_QUERIES, self.spec.name)
        try:
            queries = chat_with_repair(self.backend, system, queries_prompt(profile, reflection, self.max_queries),
                                       parse_string_list, self.max_retries)
        except ParseError:
            logger.warning(f"Actor {context.actor}: no readable queries, searching by reflection keywords")
            queries = list(reflection.keywords)
        queries = queries[:self.max_queries]
        return queries or [self._fallback_topic(profile, context.rng)]

    def decide_actions(self, profile, memory, observation, context):
        user = fill_template(self.spec.action_template, {
            "profile": profile.to_text(),
            "memory": memory.digest(),
            "observation": "\n\n".join(observation.texts) or "(nothing found)",
        })
        system = system_prompt(TASK_ACTION, self.spec.name)
        actions = chat_with_repair(self.backend, system, user,
                                   lambda text: parse_action(text, self.schema, observation), self.max_retries)
        if actions.new_item is not None and self.spec.name == "SoC":
            actions.new_item.setdefault("user", profile.name)
        if not self.spec.creation_kind:
            actions.new_item = None
        return actions


def decide_activation(backend, spec, profile, label, history_length):
    text = backend.chat(system_prompt(TASK_ACTIVATION, spec.name), activation_prompt(profile, label, history_length))
    words = text.strip().casefold().split()
    return bool(words) and words[0].strip(".!,") == "active"


def generate_items(backend, spec, count, max_retries=2):
    """Seed items written by the backend, each carrying the scenario's required attributes."""
    topics = list(load_vocabulary(spec.topic_vocab))
    system = system_prompt(TASK_ITEMS, spec.name)
    items = []
    attempts = 0
    while len(items) < count:
        if attempts > max_retries:
            raise ParseError(f"backend returned {len(items)} of {count} items after {attempts} attempts")
        attempts += 1
        try:
            records = chat_with_repair(backend, system, items_prompt(spec, count - len(items), topics),
                                       lambda text: load_structured(text, "[", "]"), 0)
        except ParseError as e:
            logger.warning(f"Item response unreadable (attempt {attempts}): {e}")
            continue
        for record in records if isinstance(records, list) else []:
            if not isinstance(record, dict):
                continue
            attrs = {k: str(v) for k, v in record.items()}
            if all(attrs.get(name, "").strip() for name in spec.required_attrs):
                items.append(attrs)
    return items[:count]
