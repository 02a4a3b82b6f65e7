"""Instantaneous spectra of the driven Hamiltonian and minimum-gap curves."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import ParameterError, ResourceCapError
from .gauge import Ansatz, assemble_hamiltonian
from .pauli import DENSE_CAP, PauliSum, to_dense
from .problem import ProblemInstance
from .schedule import Schedule
from .simulator import sum_matvec

#: Above this qubit count, low-lying eigenvalues come from a Lanczos solver.
_DENSE_DIAG_LIMIT = 11

#: Default number of uniform time samples for gap curves.
GAP_SAMPLES = 201


@dataclass(frozen=True)
class GapCurve:
    """Gap samples along the schedule plus the refined minimum."""

    times: tuple[float, ...]
    lams: tuple[float, ...]
    gaps: tuple[float, ...]
    delta_min: float
    argmin_time: float


def instantaneous_spectrum(
    inst: ProblemInstance,
    lam: float,
    lam_dot: float,
    ansatz: Ansatz,
    k: int = 2,
    *,
    dense_cap: int = DENSE_CAP,
) -> np.ndarray:
    """Lowest k eigenvalues of the assembled Hamiltonian, ascending."""
    dim = 1 << inst.n
    if not 1 <= k <= dim:
        raise ParameterError(f"need 1 <= k <= {dim}, got {k}")
    if inst.n > dense_cap:
        raise ResourceCapError(
            f"spectrum for n={inst.n} exceeds dense cap {dense_cap}"
        )
    operator = assemble_hamiltonian(inst, lam, lam_dot, ansatz)
    if inst.n <= _DENSE_DIAG_LIMIT or k > dim - 2:
        eigenvalues = np.linalg.eigvalsh(to_dense(operator, cap=dense_cap))
        return eigenvalues[:k]
    return _lanczos_low(operator, dim, k)


def _lanczos_low(operator: PauliSum, dim: int, k: int) -> np.ndarray:
    matvec = sum_matvec(operator)
    linop = LinearOperator((dim, dim), matvec=matvec, dtype=np.complex128)
    # Fixed start vector keeps the iteration, and hence emitted files,
    # bit-reproducible across runs.
    v0 = np.full(dim, 1.0 / math.sqrt(dim))
    eigenvalues = eigsh(linop, k=k, which="SA", v0=v0, return_eigenvectors=False)
    return np.sort(eigenvalues)


def operator_norm(operator: PauliSum, *, dense_cap: int = DENSE_CAP) -> float:
    """Spectral norm of a Hermitian operator sum."""
    dim = 1 << operator.n
    if operator.n <= _DENSE_DIAG_LIMIT:
        eigenvalues = np.linalg.eigvalsh(to_dense(operator, cap=max(dense_cap, operator.n)))
        return float(np.abs(eigenvalues).max())
    matvec = sum_matvec(operator)
    linop = LinearOperator((dim, dim), matvec=matvec, dtype=np.complex128)
    v0 = np.full(dim, 1.0 / math.sqrt(dim))
    extreme = eigsh(linop, k=1, which="LM", v0=v0, return_eigenvectors=False)
    return float(np.abs(extreme[0]))


def gap_curve(
    inst: ProblemInstance,
    sched: Schedule,
    ansatz: Ansatz,
    samples: int = GAP_SAMPLES,
    *,
    refine: bool = True,
    dense_cap: int = DENSE_CAP,
) -> GapCurve:
    """|E1 - E0| on a uniform time grid including both endpoints.

    The reported minimum is refined by a golden-section search around the
    grid argmin, so it can dip slightly below the coarsest grid sample; the
    stored curve keeps exactly ``samples`` uniform points.
    """
    if samples < 2:
        raise ParameterError(f"need at least 2 samples, got {samples}")

    def gap_at(t: float) -> float:
        low = instantaneous_spectrum(
            inst, sched.lam(t), sched.lam_dot(t), ansatz, 2, dense_cap=dense_cap
        )
        return float(low[1] - low[0])

    times = np.linspace(0.0, sched.total_time, samples)
    gaps = np.array([gap_at(t) for t in times])
    grid_arg = int(np.argmin(gaps))
    delta_min = float(gaps[grid_arg])
    argmin_time = float(times[grid_arg])

    if refine:
        lo = float(times[max(grid_arg - 1, 0)])
        hi = float(times[min(grid_arg + 1, samples - 1)])
        t_star, g_star = _golden_section(gap_at, lo, hi, tol=sched.total_time * 1e-6)
        if g_star < delta_min:
            delta_min, argmin_time = g_star, t_star

    return GapCurve(
        times=tuple(float(t) for t in times),
        lams=tuple(sched.lam(float(t)) for t in times),
        gaps=tuple(float(g) for g in gaps),
        delta_min=delta_min,
        argmin_time=argmin_time,
    )


def gap_rows(curve: GapCurve, ansatz: Ansatz, instance_id) -> list[tuple]:
    """Plot-ready rows (t, lambda, gap, ansatz, instance_id)."""
    return [
        (t, lam, gap, ansatz.value, instance_id)
        for t, lam, gap in zip(curve.times, curve.lams, curve.gaps)
    ]


def _golden_section(fn, lo: float, hi: float, tol: float, max_iter: int = 80):
    """Minimize a unimodal-ish scalar function on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    best_t, best_f = (c, fc) if fc <= fd else (d, fd)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
        if fc < best_f:
            best_t, best_f = c, fc
        if fd < best_f:
            best_t, best_f = d, fd
    return best_t, best_f
