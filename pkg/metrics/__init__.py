from .powerlaw import PowerLawFit, fit_power_law, fit_all, valid_metric, d_k_cross
from .structure import (StructureSummary, avg_clustering, assortativity, effective_diameter, lcc_fraction,
                        friendship_paradox_fraction, snr_periodicity, cc_ratio, dense_core_profile,
                        structure_summary)
from .orbits import count_orbits
from .mmd import MmdReport, GEM_FORMULA, compute_mmd, gaussian_emd, gem, mmd, mmd_report, sample_subgraphs
from .report import evaluate_graph
