"""Spectral space-time solver for a regularized time-periodic compressible
Navier-Stokes-Fourier scheme, with admissibility and balance-identity audits."""

from nsfp._core import (
    DomainError,
    ParameterError,
    ConfigError,
    AdmissibilityError,
    thermo_eval,
    gibbs_residual,
    transport_eval,
    dissipation_eval,
    discriminant,
    a_window,
    interpolation_exponents,
    estimate_chain_report,
    phi_eval,
    phi_inverse,
    solve,
    run_single,
)

__all__ = [
    "DomainError",
    "ParameterError",
    "ConfigError",
    "AdmissibilityError",
    "thermo_eval",
    "gibbs_residual",
    "transport_eval",
    "dissipation_eval",
    "discriminant",
    "a_window",
    "interpolation_exponents",
    "estimate_chain_report",
    "phi_eval",
    "phi_inverse",
    "solve",
    "run_single",
]
