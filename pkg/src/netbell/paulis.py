"""Pauli matrices and tensor products of Pauli strings."""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# Index characters for Pauli strings, e.g. "zz", "1xz".
PAULI_BY_CHAR = {"1": I2, "x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


def pauli_string_matrix(index: str) -> np.ndarray:
    """Dense matrix of a tensor product of Paulis, one character per qubit."""
    mat = np.array([[1.0 + 0j]])
    for ch in index:
        try:
            factor = PAULI_BY_CHAR[ch]
        except KeyError:
            raise ValueError(f"invalid Pauli index character {ch!r} in {index!r}") from None
        mat = np.kron(mat, factor)
    return mat
