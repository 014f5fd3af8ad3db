"""Sequential ABC with data-conditional (guided) proposal samplers.

The package implements two sequential likelihood-free inference loops
(importance-sampling and Monte Carlo flavours) together with a catalog
of proposal samplers that condition on the observed summary statistics,
including Gaussian-conditional, variance-optimized and copula-based
variants, plus benchmark simulators and posterior diagnostics.
"""

__version__ = "0.1.0"

from .engine import (
    IterationReport,
    ParticleSystem,
    RunResult,
    StoppingRules,
    ThresholdSchedule,
    ess,
    resample_equal_weight,
    run,
    update_threshold,
)
from .estimator import SequentialABC
from .metrics import EmpiricalSample, posterior_summary, wasserstein1
from .models import get_model
from .proposals import ProposalSpec

__all__ = [
    "__version__",
    "SequentialABC",
    "ProposalSpec",
    "ThresholdSchedule",
    "StoppingRules",
    "ParticleSystem",
    "IterationReport",
    "RunResult",
    "EmpiricalSample",
    "run",
    "ess",
    "update_threshold",
    "resample_equal_weight",
    "posterior_summary",
    "wasserstein1",
    "get_model",
]
