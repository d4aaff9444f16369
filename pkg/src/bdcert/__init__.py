"""Certified transient analysis of periodic birth-death queues with
catastrophes (jumps to 0) and bulk arrivals when empty.

The library computes logarithmic-norm contraction certificates, selects
state-space truncation levels whose error is bounded uniformly in time, and
integrates the truncated forward equations to extract limiting periodic
characteristics with a guaranteed total accuracy.  A thinning Monte Carlo
simulator provides an independent cross-check.
"""

from .bounds import (BoundPair, DecayEnvelope, ErgodicityReport,
                     catastrophe_floor, catastrophe_floor_fn, decay_envelope,
                     ergodicity_bound, ergodicity_report, log_norm,
                     mean_convergence_bound, weighted_contraction_fn,
                     weighted_contraction_rate, weighted_ergodicity_bound)
from .config import load_model, model_from_config, model_to_config, save_model
from .errors import (BdcertError, CertificationError, EssentialRateError,
                     IntegrationError, ModelValidationError,
                     SeriesDivergenceError, SimulationError,
                     TruncationTargetError)
from .mc import SimConfig, SimResult, simulate
from .model import (AdditiveDecayRule, CappedLinearRule, ExplicitCoefRule,
                    GeneratorSlice, GeometricCoefRule, IntensityModel,
                    PowerCoefRule, RateFamily, SharedRule, build_generator,
                    diagonal_bound, truncation_defect_action)
from .presets import PRESETS, Preset, get_preset, published_inputs
from .rates import Constant, Expression, Sinusoid, Tabulated
from .solver import (LimitingRegime, Trajectory, delta_vector, integrate,
                     limiting_regime, mean_of, solve_full_system)
from .truncation import (BoundCertificate, CertificateInputs, bulk_tail_sup,
                         certificate_inputs, floor_peak, make_certificate,
                         mean_truncation_bound, pinned_inputs,
                         select_truncation, tv_truncation_bound)
from .weights import (ExplicitWeights, GeometricThenLinearWeights,
                      GeometricWeights, ONES, parse_weights, weighted_norm)

__version__ = "0.1.0"
