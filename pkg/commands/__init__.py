from . import ablate, compare, evaluate, fold, simulate, speedup

COMMANDS = (simulate, fold, evaluate, compare, ablate, speedup)
