from .bipartite import (ACTOR, ITEM, CORE, REGULAR, NodeId, ActorNode, ItemNode, TypedEdge,
                        ItemSnapshot, BipartiteGraph, actor_id, item_id, save_graph, load_graph)
from .folding import FOLD_SPECS, FoldSpec, FoldedGraph, fold, degrees, save_folded, load_folded
from .scenario import (ScenarioSpec, Termination, builtin_scenarios, get_scenario, load_seed,
                       render_item_text, check_termination, item_topics)
