import logging
import re
from dataclasses import dataclass, field

from agents.parsing import parse_profile_list
from agents.prompts import REPAIR_SUFFIX, TASK_PROFILES, system_prompt
from errors import ParseError
from graph.scenario import fill_template
from vocabulary import load_vocabulary

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AgentProfile:
    name: str
    attributes: dict = field(default_factory=dict)

    def interests(self):
        for key in ("topics", "genres"):
            value = self.attributes.get(key)
            if value:
                return [str(v) for v in (value if isinstance(value, (list, tuple)) else [value])]
        return []

    def to_text(self):
        lines = [f"name: {self.name}"]
        for key, value in self.attributes.items():
            if isinstance(value, (list, tuple)):
                value = ", ".join(str(v) for v in value)
            lines.append(f"{key}: {value}")
        return "\n".join(lines)

    def as_attrs(self):
        return {"name": self.name, **self.attributes}

    @classmethod
    def from_attrs(cls, attrs, fallback_name="actor"):
        attrs = dict(attrs)
        name = str(attrs.pop("name", "") or fallback_name)
        return cls(name, attrs)


def _pick(rng, vocab, k=1):
    picks = rng.choice(len(vocab), size=min(k, len(vocab)), replace=False)
    return [vocab[int(i)] for i in picks]


def _full_name(rng):
    return f"{_pick(rng, load_vocabulary('first_names'))[0]} {_pick(rng, load_vocabulary('last_names'))[0]}"


def draw_profile_record(scenario_name, rng):
    """One profile in the same shape the scenario's profile template asks an LLM for."""
    if scenario_name == "SC":
        institutions = load_vocabulary("institutions")
        countries = load_vocabulary("countries")
        i = int(rng.integers(len(institutions)))
        return {
            "name": _full_name(rng),
            "expertises": _pick(rng, load_vocabulary("expertises"), int(rng.integers(1, 3))),
            "institution": institutions[i],
            "country": countries[i % len(countries)],
            "topics": _pick(rng, load_vocabulary("topics"), int(rng.integers(2, 4))),
        }
    if scenario_name == "TC":
        return {
            "name": _full_name(rng),
            "gender": "F" if rng.random() < 0.5 else "M",
            "age": int(rng.integers(18, 66)),
            "job": _pick(rng, load_vocabulary("jobs"))[0],
            "genres": _pick(rng, load_vocabulary("genres"), 2),
        }
    topics = _pick(rng, load_vocabulary("social_topics"), 2)
    return {
        "user name": _full_name(rng),
        "user description": f"Talks about {topics[0]} and {topics[1]}.",
    }


def _topics_in(text, vocab):
    words = set(re.findall(r"[\w-]+", str(text).casefold()))
    return [token for token in vocab if token.casefold() in words]


def profile_from_record(scenario_name, record):
    record = dict(record)
    if scenario_name == "SoC":
        name = str(record.pop("user name", "") or record.pop("name", "")).strip()
        description = str(record.pop("user description", "") or record.pop("description", ""))
        attributes = {"description": description,
                      "topics": _topics_in(description, load_vocabulary("social_topics"))}
        attributes.update(record)
    else:
        name = str(record.pop("name", "")).strip()
        if not name and scenario_name == "TC":
            name = f"watcher {record.get('age', '')} {record.get('job', '')}".strip()
        attributes = record
        if scenario_name == "SC":
            vocab = set(load_vocabulary("topics"))
            attributes["topics"] = [t for t in attributes.get("topics", []) if t in vocab]
    if not name:
        raise ParseError("profile without a name")
    return AgentProfile(name, attributes)


def _profile_prompt(spec, count):
    slots = {
        "count": count,
        "topics": ", ".join(load_vocabulary(spec.topic_vocab)),
        "expertises": ", ".join(load_vocabulary("expertises")),
        "genres": ", ".join(load_vocabulary("genres")),
        "jobs": ", ".join(load_vocabulary("jobs")),
    }
    return fill_template(spec.profile_template, slots)


def generate_profiles(backend, spec, count, rng, max_retries=2):
    """Vocabulary draws when no backend is given, otherwise the scenario's profile prompt."""
    if count < 0:
        raise ValueError(f"profile count must be >= 0, got {count}")
    if count == 0:
        return []
    if backend is None:
        return [profile_from_record(spec.name, draw_profile_record(spec.name, rng)) for _ in range(count)]

    system = system_prompt(TASK_PROFILES, spec.name)
    profiles = []
    attempts = 0
    repair = ""
    while len(profiles) < count:
        if attempts > max_retries:
            raise ParseError(f"backend returned {len(profiles)} of {count} profiles after {attempts} attempts")
        attempts += 1
        text = backend.chat(system, _profile_prompt(spec, count - len(profiles)) + repair)
        try:
            batch = [profile_from_record(spec.name, r) for r in parse_profile_list(text)]
        except ParseError as e:
            logger.warning(f"Profile response unreadable (attempt {attempts}): {e}")
            repair = REPAIR_SUFFIX
            continue
        repair = ""
        profiles.extend(batch[:count - len(profiles)])
    logger.info(f"Generated {len(profiles)} {spec.name} profiles through the backend")
    return profiles
