import logging
from collections import Counter
from dataclasses import dataclass, field

from agents.parsing import parse_keywords
from agents.prompts import TASK_REFLECT, reflect_prompt, system_prompt

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 20
DEFAULT_KEYWORDS = 3


@dataclass(frozen=True)
class MemoryRecord:
    round: int
    kind: str
    item: int
    topic: str = ""
    text: str = ""


@dataclass(frozen=True)
class Reflection:
    summary: str
    keywords: tuple


@dataclass
class AgentMemory:
    action_log: list = field(default_factory=list)
    summary: str = ""
    last_reflection_round: int = 0

    def record(self, entry):
        self.action_log.append(entry)

    def recent(self, window):
        if window <= 0:
            return []
        return list(self.action_log[-window:])

    def snapshot(self):
        """Copy handed to a worker; the coordinator keeps the original."""
        return AgentMemory(list(self.action_log), self.summary, self.last_reflection_round)

    def digest(self, last=5):
        lines = [f"round {r.round}: {r.kind} {r.text or f'item #{r.item}'}" for r in self.action_log[-last:]]
        head = self.summary or "nothing summarized yet"
        return head + ("\n" + "\n".join(lines) if lines else "")


def reflect(memory, backend=None, window=DEFAULT_WINDOW, profile=None, keywords=DEFAULT_KEYWORDS,
            scenario_name="SC"):
    """Count-based when no backend is given; otherwise the backend writes the summary."""
    recent = memory.recent(window)
    fallback = tuple(profile.interests()[:keywords]) if profile is not None else ()

    if backend is None:
        topics = [r.topic for r in recent if r.topic]
        if not topics:
            return Reflection("no recent actions", fallback)
        counts = Counter(topics).most_common()
        summary = "; ".join(f"{topic} x{n}" for topic, n in counts)
        return Reflection(summary, tuple(topic for topic, _ in counts[:keywords]))

    text = backend.chat(system_prompt(TASK_REFLECT, scenario_name), reflect_prompt(profile, recent))
    summary, found = parse_keywords(text)
    if not found:
        logger.debug("Reflection returned no keywords, falling back to profile interests")
    return Reflection(summary or text.strip()[:200], tuple(found[:keywords]) or fallback)
