from .profiles import AgentProfile, generate_profiles, draw_profile_record, profile_from_record
from .memory import AgentMemory, MemoryRecord, Reflection, reflect
from .activation import ActivationPolicy, activate, label_core, ceil_fraction
from .parsing import ActionSet, ActionSchema, SCHEMAS, parse_action
from .backend import BackendConfig, ChatExchange, ReplayBackend, RemoteBackend, build_backend, load_exchanges
from .mock_backend import MockBackend
from .policy import AgentPolicy, DecisionContext, HeuristicPolicy, heuristic_policy
from .llm_policy import LlmPolicy, decide_activation, generate_items
