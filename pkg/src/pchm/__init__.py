"""Hub models and penalized component hub models for grouped network data."""

from .core import (
    NEG_INF,
    GroupedData,
    HubParams,
    Posterior,
    e_step,
    hm_log_likelihood,
    m_step_A,
    m_step_rho,
    pchm_objective,
)
from .estimate import (
    EtaPath,
    FitConfig,
    FitResult,
    bic,
    count_params,
    eta_grid,
    fit_hm,
    fit_pchm,
    select_eta,
)
from .baselines import co_occurrence, half_weight_index

__version__ = "0.1.0"
