"""Thermodynamic formalism for sub-additive potentials on shift spaces."""

import json as _json
import os as _os

_examples = _os.path.join(_os.path.dirname(__file__), "examples")
if _os.path.isdir(_examples):
    _os.environ.setdefault("THERMOFORM_DATA_DIR", _examples)

from ._core import (
    BudgetExceeded,
    ConfigError,
    DomainError,
    InvalidArgument,
    Potential,
    ShiftSpace,
    bernoulli_entropy,
    check_irreducibility,
    constant_potential,
    finite_pressure,
    legendre_inf,
    lyapunov_domain,
    markov_entropy,
    norm_potential,
    pressure_curve,
    run_cli,
    run_verify_json as _run_verify_json,
    set_thread_count,
    singular_value_potential,
    spectrum_curve,
    spectrum_value,
    symbol_potential,
    thread_count,
)

__version__ = "0.1.0"


def run_verify(ids=()):
    """Runs the acceptance checks (all by default) and returns the report dict."""
    return _json.loads(_run_verify_json(list(ids)))

__all__ = [name for name in dir() if not name.startswith("_")]
