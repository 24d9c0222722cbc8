# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""GF(2^8) arithmetic on numpy arrays, generated from the 0x11D primitive polynomial."""

import numpy as np

from scherbe.exceptions import SingularMatrixError

PRIMITIVE_POLYNOMIAL = 0x11D
FIELD_SIZE = 256


def _build_tables() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    exp = np.zeros(2 * FIELD_SIZE, dtype=np.uint8)
    log = np.zeros(FIELD_SIZE, dtype=np.int64)
    x = 1
    for power in range(FIELD_SIZE - 1):
        exp[power] = x
        log[x] = power
        x <<= 1
        if x & FIELD_SIZE:
            x ^= PRIMITIVE_POLYNOMIAL
    exp[FIELD_SIZE - 1 : 2 * (FIELD_SIZE - 1)] = exp[: FIELD_SIZE - 1]

    nonzero = np.arange(1, FIELD_SIZE)
    mul = np.zeros((FIELD_SIZE, FIELD_SIZE), dtype=np.uint8)
    mul[1:, 1:] = exp[log[nonzero][:, None] + log[nonzero][None, :]]

    inv = np.zeros(FIELD_SIZE, dtype=np.uint8)
    inv[1:] = exp[(FIELD_SIZE - 1) - log[nonzero]]
    for table in (exp, log, mul, inv):
        table.flags.writeable = False
    return exp, log, mul, inv


EXP, LOG, MUL, INV = _build_tables()


def gf_mul(a: int, b: int) -> int:
    return int(MUL[a, b])


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^8)")
    return int(INV[a])


def gf_pow(a: int, exponent: int) -> int:
    if exponent == 0:
        return 1
    if a == 0:
        return 0
    return int(EXP[(int(LOG[a]) * exponent) % (FIELD_SIZE - 1)])


def mat_mul(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Matrix product over GF(2^8); `right` may be a (k, length) block of byte rows."""
    products = MUL[left[:, :, None], right[None, :, :]]
    return np.bitwise_xor.reduce(products, axis=1).astype(np.uint8)


def mat_inv(matrix: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inversion over GF(2^8).

    Raises:
        SingularMatrixError: matrix is not invertible.

    """
    size = matrix.shape[0]
    work = np.concatenate([matrix.astype(np.uint8), np.eye(size, dtype=np.uint8)], axis=1)
    for col in range(size):
        pivots = np.flatnonzero(work[col:, col]) + col
        if len(pivots) == 0:
            raise SingularMatrixError(f"matrix of size {size} is singular at column {col}")
        pivot = int(pivots[0])
        if pivot != col:
            work[[col, pivot]] = work[[pivot, col]]
        work[col] = MUL[INV[work[col, col]], work[col]]
        factors = work[:, col].copy()
        factors[col] = 0
        work ^= MUL[factors[:, None], work[col][None, :]]
    return work[:, size:].copy()


def vandermonde(rows: int, cols: int) -> np.ndarray:
    """rows x cols matrix with entry (i, j) = i**j, evaluated at the distinct points 0..rows-1."""
    return np.array([[gf_pow(i, j) for j in range(cols)] for i in range(rows)], dtype=np.uint8)
