"""Small hand-sized matrices used in tests, notebooks and the CLI demos."""

from __future__ import annotations

from .tanner import MeasurementMatrix


def weighted_demo():
    """4x6 weighted matrix with a 3-sparse signal that IPA recovers.

    Returns ``(A, x, y)``.
    """
    A = MeasurementMatrix.from_dense([
        [1, 2, 1, 0, 0, 0],
        [3, 0, 0, 1, 3, 0],
        [0, 1, 0, 1, 0, 3],
        [0, 0, 4, 0, 3, 2],
    ])
    x = [1, 8, 3, 0, 0, 0]
    y = [20, 3, 8, 12]
    return A, x, y


def partial_recovery_demo():
    """4x6 binary matrix where IPA fails on a stopping-set-free support.

    The support ``{2, 3}`` is not a stopping set, yet variable 3 is not
    recovered.  Returns ``(A, x, y)``.
    """
    A = MeasurementMatrix.from_row_supports(6, [[0, 1, 5], [0, 3, 4], [1, 2, 5], [2, 3, 4]])
    x = [0, 0, 1, 1, 0, 0]
    y = [0, 1, 1, 2]
    return A, x, y


def redundancy_demo():
    """5x5 binary matrix and its extension by the row ``c1 - c0``.

    In the base matrix ``{0, 1}`` is termatiko; after the extension it is
    not.  Returns ``(A, A_ext, extra_row)``.
    """
    A = MeasurementMatrix.from_dense([
        [1, 0, 0, 1, 0],
        [1, 0, 1, 1, 0],
        [1, 0, 0, 0, 1],
        [0, 1, 1, 0, 0],
        [0, 1, 1, 0, 1],
    ])
    extra = [0, 0, 1, 0, 0]
    return A, A.with_rows([extra]), extra


def class1_demo():
    """7-variable matrix where ``T = {0, 1}`` is termatiko via a companion node."""
    A = MeasurementMatrix.from_row_supports(7, [[0, 2, 4, 6], [1, 2, 5, 6], [3, 4, 5, 6]])
    return A, (0, 1)


def class2_demo():
    """7-variable matrix where ``T = {1, 2, 5}`` is termatiko without every
    measurement seeing the companion set."""
    A = MeasurementMatrix.from_row_supports(7, [[0, 1, 4, 6], [1, 2, 5], [2, 3, 4, 5, 6]])
    return A, (1, 2, 5)
