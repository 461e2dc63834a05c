import re

TASK_PROFILES = "profiles"
TASK_ITEMS = "items"
TASK_ACTIVATION = "activation"
TASK_REFLECT = "reflect"
TASK_QUERIES = "queries"
TASK_ACTION = "action"

REPAIR_SUFFIX = ("\n\nYour previous answer could not be read. Reply again with only the requested "
                 "JSON structure and nothing else.")

_ROLES = {
    TASK_PROFILES: "You generate realistic but fictional profiles for a social simulation.",
    TASK_ITEMS: "You generate realistic but fictional content items for a social simulation.",
    TASK_ACTIVATION: "You decide whether a simulated person takes part in this round.",
    TASK_REFLECT: "You summarize what a simulated person did recently and name their current interests.",
    TASK_QUERIES: "You turn a simulated person's interests into short search queries.",
    TASK_ACTION: "You role-play the person described below and act on what they found.",
}

_HEADER = re.compile(r"^(Task|Scenario):\s*(\S+)\s*$", re.MULTILINE)


def system_prompt(task, scenario_name):
    return f"Task: {task}\nScenario: {scenario_name}\n{_ROLES[task]}"


def prompt_headers(system):
    return dict(_HEADER.findall(system))


def reflect_prompt(profile, records):
    lines = [f"round {r.round}: {r.kind} item #{r.item} topic={r.topic or '-'}" for r in records]
    history = "\n".join(lines) if lines else "(nothing yet)"
    interests = ", ".join(profile.interests()) if profile is not None else ""
    return (f"{profile.to_text() if profile is not None else ''}\n"
            f"Interests: {interests}\n\n"
            f"Recent actions:\n{history}\n\n"
            "Answer with two lines:\nSummary: <one sentence>\nKeywords: <up to 3 comma-separated keywords>")


def queries_prompt(profile, reflection, max_queries):
    return (f"{profile.to_text()}\n\n"
            f"Memory summary: {reflection.summary}\n"
            f"Keywords: {', '.join(reflection.keywords)}\n\n"
            f"Write up to {max_queries} short search queries as a JSON list of strings.")


def activation_prompt(profile, label, history_length):
    return (f"{profile.to_text()}\n"
            f"Label: {label}\n"
            f"Actions so far: {history_length}\n\n"
            "Will this person be active this round? Answer with one word: active or idle.")


def items_prompt(spec, count, topics):
    fields = ", ".join(f'"{name}"' for name in spec.required_attrs)
    return (f"Please generate me a list of {count} different {spec.item_type}s about these topics: "
            f"{', '.join(topics)}.\nEach entry is an object with the fields {fields}. "
            "Respond with a JSON list only.")
