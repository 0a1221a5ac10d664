import math
import logging

import numpy as np

logger = logging.getLogger(__name__)

JACOBI_TOLERANCE = 1e-12


def _as_square(matrix: np.ndarray) -> np.ndarray:
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"Expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("Matrix entries must be finite")
    return A


def _cubic_max_real_part(a: float, b: float, c: float) -> float:
    """Largest real part among the roots of l^3 + a l^2 + b l + c"""
    shift = a / 3.0
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    if disc > 0:
        root = math.sqrt(disc)
        t_real = float(np.cbrt(-q / 2.0 + root) + np.cbrt(-q / 2.0 - root))
        # The complex pair has real part -t_real/2 since the roots sum to zero
        return max(t_real, -t_real / 2.0) - shift

    if p == 0:
        return -shift
    radius = 2.0 * math.sqrt(-p / 3.0)
    argument = 3.0 * q / (p * radius)
    argument = min(1.0, max(-1.0, argument))
    return radius * math.cos(math.acos(argument) / 3.0) - shift


def max_real_eigenvalue(matrix: np.ndarray) -> float:
    """Closed-form largest real part of the eigenvalues for p <= 3"""
    A = _as_square(matrix)
    p = A.shape[0]
    if p == 1:
        return float(A[0, 0])
    if p == 2:
        trace = A[0, 0] + A[1, 1]
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        disc = trace * trace - 4.0 * det
        if disc >= 0:
            return float((trace + math.sqrt(disc)) / 2.0)
        return float(trace / 2.0)
    if p == 3:
        trace = float(np.trace(A))
        minors = (
            A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
            + A[0, 0] * A[2, 2] - A[0, 2] * A[2, 0]
            + A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1]
        )
        det = float(np.linalg.det(A))
        return _cubic_max_real_part(-trace, float(minors), -det)
    raise ValueError(f"Closed form covers p <= 3, got p = {p}")


def jacobi_eigenvalues(matrix: np.ndarray, tol: float = JACOBI_TOLERANCE) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations"""
    A = _as_square(matrix).copy()
    n = A.shape[0]
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * (1.0 + np.max(np.abs(A)))):
        raise ValueError("Jacobi rotations need a symmetric matrix")
    if n == 1:
        return A.diagonal().copy()

    scale = max(1.0, float(np.linalg.norm(A)))
    max_sweeps = 5 * n * n
    for sweep in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.triu(A, 1) ** 2)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
    else:
        logger.warning(f"Jacobi rotations stopped after {max_sweeps} sweeps above tolerance {tol}")
    return np.sort(A.diagonal())


def max_symmetric_eigenvalue(matrix: np.ndarray, tol: float = JACOBI_TOLERANCE) -> float:
    """Largest eigenvalue of a symmetric matrix"""
    H = _as_square(matrix)
    p = H.shape[0]
    if p == 1:
        return float(H[0, 0])
    if p == 2:
        mean = 0.5 * (H[0, 0] + H[1, 1])
        half_gap = 0.5 * (H[0, 0] - H[1, 1])
        return float(mean + math.hypot(half_gap, 0.5 * (H[0, 1] + H[1, 0])))
    if p == 3:
        return max_real_eigenvalue(H)
    return float(jacobi_eigenvalues(H, tol)[-1])
