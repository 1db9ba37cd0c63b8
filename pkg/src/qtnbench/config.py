"""Project-wide numerical conventions and caps."""

import os

# qubit q <-> bit q of a basis index (qubit 0 = least significant bit)
DENSE_CAP_ENV = "QEMU_DENSE_CAP"
DEFAULT_DENSE_CAP = 20
MATRIX_CAP = 14

DROP_TOL = 1e-12
HERMITIAN_TOL = 1e-10
ACCURACY_THRESHOLD_HA = 1.6e-3
REPRESENTATIVE_TIME_AU = 10.0


def dense_cap() -> int:
    """Qubit cap for dense statevector work, overridable through the environment."""
    raw = os.environ.get(DENSE_CAP_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_DENSE_CAP
    return int(raw)
