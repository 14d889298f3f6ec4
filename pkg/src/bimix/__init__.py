"""Renormalized-activity cluster expansion for binary sphere mixtures."""

from .estimates import MCEstimate
from .geometry import BallSpec, BoxSpec, corona_volume, lens_volume
from .interactions import Cloud, Configuration, MixtureParams, Model, psi, psi_T
from .effective import EffectiveActivity, zhat
from .expansion import b_m, db_m_dzr, pressure_series, rho_R, rho_r
from .convergence import ConvergenceWitness, Criterion, PreconditionError
from .oracle import OracleConfig, run_oracle
from .validation import validate_all

__all__ = [
    "MCEstimate", "BallSpec", "BoxSpec", "corona_volume", "lens_volume", "Cloud", "Configuration",
    "MixtureParams", "Model", "psi", "psi_T", "EffectiveActivity", "zhat", "b_m", "db_m_dzr",
    "pressure_series", "rho_R", "rho_r", "ConvergenceWitness", "Criterion", "PreconditionError",
    "OracleConfig", "run_oracle", "validate_all",
]
__version__ = "0.1.0"
