"""Desk-scale emulation lab for Trotterized molecular Hamiltonian dynamics.

Pipeline: spin-orbital integrals -> Jordan-Wigner Pauli sum -> first-order
Trotter circuit -> dense statevector or bond-limited MPS -> one-body RDM and
the temporal observable ``F(t) = sum_rs h_eff[r,s] <a+_r a_s>``.
"""

from .errors import (ContractViolation, FitError, NumericalIntegrityError, ParseError, QtnError,
                     ResourceError, RunTimeout, ValidationError)

__version__ = "0.1.0"

__all__ = [
    "ContractViolation", "FitError", "NumericalIntegrityError", "ParseError", "QtnError",
    "ResourceError", "RunTimeout", "ValidationError", "__version__",
]
