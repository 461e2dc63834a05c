from .encoder import Encoder, HashingEncoder, BackendEncoder, build_encoder, hash_embed, tokenize
from .retrieval import VectorIndex, Observation, index_items, recall, assemble_observation
from .rerank import PreferenceContext, rerank_coarse, rerank_fine, preference_score
from .interaction import (SragConfig, ActorTurn, ActorDelta, RoundDeltas, RoundContext, build_round_context,
                          interact, run_round)
