"""Simulator and numerical-verification toolkit for pull rumor spreading on
complete graphs: exact informed-count distributions, the Poisson branching
surrogate and its martingale limit, characteristic-function iteration, the
lattice-restricted limit law, Lambert-W population subsequences, and
verifiers comparing all of the above."""

__version__ = "0.1.0"

from .asymptotics import (EndgameSummary, ResidualPoint, SubsequencePoint,
                          SubsequenceSpec, TailDecayReport, TailPoint,
                          TvDistance, VerificationReport, circular_distance,
                          lambert_w, recurrence_depth,
                          recurrence_ensemble_report, runtime_residual_scan,
                          runtime_shift, subsequence, sup_tail_distance,
                          tail_comparison_rows, tail_decay_check, tv_distance,
                          verify_endgame, verify_recurrence, verify_tv_bound)
from .branching import (BranchingSample, branching_moments,
                        exact_branching_pmf, martingale_checkpoints,
                        sample_branching, sample_neg_log2_h)
from .charfn import (PhasePair, decay_depth, ecf, f_iterate, f_map, h_apply,
                     h_iterate, loglog_slope, modulus_decay_scan,
                     modulus_recursion_check, phi, phi_grid)
from .limitdist import (EmpiricalDistribution, LatticeLaw, density_grid,
                        kde_density, lattice_law, lattice_mean,
                        lattice_second, lattice_variance, scott_bandwidth)
from .pmf import CapacityError, ExactPmf
from .protocol import (EndgameReport, EnsembleResult, ProtocolState,
                       RunRecord, TrajectoryEnsemble, endgame_stats, ensemble,
                       exact_informed_pmf, informed_counts, initial_state,
                       round_cap, run, step, substream_seeds,
                       trajectory_ensemble)

__all__ = [name for name in dir() if not name.startswith("_")]
