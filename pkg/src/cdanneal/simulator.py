"""Dense state-vector engine for digitized driven evolutions.

Pauli-string exponentials are applied exactly: every string P is an
involution, so exp(-i theta P) = cos(theta) I - i sin(theta) P, and the
action of P on a state factors into an index XOR permutation plus a sign
pattern.  No gate decomposition happens here; circuit-level costs are
tracked symbolically in the evolution report.
"""

from __future__ import annotations

import struct
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    DimensionMismatchError,
    IntegratorError,
    ParameterError,
    ResourceCapError,
    SingularGaugeError,
)
from .gauge import Ansatz, cd_coefficients, cd_terms
from .pauli import PauliString, PauliSum, string_amplitudes
from .problem import STATEVECTOR_CAP, GroundTruth, ProblemInstance
from .schedule import Schedule

_STATE_MAGIC = b"CDSTATEV"


@dataclass
class StateVector:
    """2**n complex amplitudes; owned by a single evolution at a time."""

    n: int
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amplitudes.copy())


@dataclass
class EvolutionReport:
    """Final state plus unitarity and cost bookkeeping for one evolution."""

    final_state: StateVector
    step_norms: tuple[float, ...]
    operator_applications: int
    single_per_step: int
    entangling_per_step: int
    single_total: int
    entangling_total: int
    wall_seconds: float
    cd_coefficient_table: tuple[tuple[float, ...], ...] | None = None


def plus_state(n: int, cap: int = STATEVECTOR_CAP) -> StateVector:
    """Uniform superposition with real amplitudes 2**(-n/2)."""
    if n < 1:
        raise ParameterError(f"qubit count must be >= 1, got {n}")
    if n > cap:
        raise ResourceCapError(f"state vector for n={n} exceeds cap {cap}")
    return StateVector(n, np.full(1 << n, 2.0 ** (-n / 2.0), dtype=np.complex128))


class _Compiled:
    """Per-string arrays reused across many exponential applications."""

    __slots__ = ("diagonal", "signs", "perm", "gathered", "entangling")

    def __init__(self, string: PauliString):
        perm, amps = string_amplitudes(string)
        self.entangling = string.weight >= 2
        self.diagonal = string.is_diagonal
        if self.diagonal:
            # y_count is zero for diagonal strings, so amps is real.
            self.signs = amps.real
            self.perm = None
            self.gathered = None
        else:
            self.signs = None
            self.perm = perm
            # amps indexed at b ^ x equals amps at b times (-1)**y_count.
            self.gathered = amps * ((-1.0) ** string.y_count)

    def action(self, psi: np.ndarray) -> np.ndarray:
        if self.diagonal:
            return self.signs * psi
        return self.gathered * psi[self.perm]

    def apply_exp(self, psi: np.ndarray, theta: float) -> None:
        """In-place psi <- exp(-i theta P) psi."""
        c, s = np.cos(theta), np.sin(theta)
        if self.diagonal:
            psi *= c - 1j * s * self.signs
        else:
            psi[:] = c * psi - 1j * s * (self.gathered * psi[self.perm])


def apply_pauli_exponential(
    state: StateVector, string: PauliString, theta: float
) -> StateVector:
    """Apply exp(-i theta P) to the state in place and return it."""
    if string.n != state.n:
        raise DimensionMismatchError(
            f"string acts on {string.n} qubits, state has {state.n}"
        )
    _Compiled(string).apply_exp(state.amplitudes, theta)
    return state


def apply_pauli_sum(operator: PauliSum, psi: np.ndarray) -> np.ndarray:
    """Matrix-free action of an operator sum on an amplitude array."""
    out = np.zeros_like(psi)
    for string, coeff in operator.terms.items():
        out += coeff * _Compiled(string).action(psi)
    return out


def sum_matvec(operator: PauliSum):
    """Compile an operator sum once and return a fast matvec closure."""
    compiled = [(coeff, _Compiled(s)) for s, coeff in operator.terms.items()]

    def matvec(psi: np.ndarray) -> np.ndarray:
        out = np.zeros(psi.shape[0], dtype=np.complex128)
        flat = np.asarray(psi, dtype=np.complex128).reshape(-1)
        for coeff, comp in compiled:
            out += coeff * comp.action(flat)
        return out

    return matvec


class _TermTable:
    """Canonically ordered Trotter terms with per-step coefficient evaluation.

    Order: single-qubit X by ascending site, single-qubit Z by ascending site
    (nonzero fields only), ZZ couplings lexicographic (nonzero only), then the
    CD strings in the gauge module's canonical order.
    """

    def __init__(self, inst: ProblemInstance, ansatz: Ansatz):
        self.inst = inst
        self.ansatz = ansatz
        n = inst.n
        strings: list[PauliString] = [PauliString.single(n, i, "X") for i in range(n)]
        static_parts: list[tuple[str, float]] = [("x", 1.0)] * n
        for i, h in enumerate(inst.fields):
            if h != 0.0:
                strings.append(PauliString.single(n, i, "Z"))
                static_parts.append(("z", h))
        for i, j, value in inst.couplings:
            if value != 0.0:
                strings.append(PauliString(n, 0, (1 << i) | (1 << j)))
                static_parts.append(("zz", value))
        self.cd_strings = cd_terms(inst, ansatz)
        strings.extend(self.cd_strings)
        self.strings = strings
        self.static_parts = static_parts
        self.compiled = [_Compiled(s) for s in strings]
        self.single_count = sum(1 for s in strings if s.weight == 1)
        self.entangling_count = len(strings) - self.single_count

    def coefficients(self, lam: float, lam_dot: float) -> np.ndarray:
        values = np.empty(len(self.strings))
        for idx, (kind, base) in enumerate(self.static_parts):
            if kind == "x":
                values[idx] = -(1.0 - lam)
            else:
                values[idx] = lam * base
        if self.cd_strings:
            values[len(self.static_parts):] = cd_coefficients(
                self.inst, self.ansatz, lam, lam_dot
            )
        return values


def trotter_evolve(
    inst: ProblemInstance,
    sched: Schedule,
    ansatz: Ansatz,
    *,
    cap: int = STATEVECTOR_CAP,
    audit_cd: bool = False,
) -> EvolutionReport:
    """First-order digitized evolution from the uniform superposition.

    Each grid step k applies exp(-i dt c_j(t_k) P_j) for every term P_j of
    the assembled Hamiltonian, coefficients evaluated at the step's grid
    point, in the fixed canonical term order.  A gauge singularity at any
    grid point aborts with the offending step index attached.
    """
    if inst.n > cap:
        raise ResourceCapError(f"state vector for n={inst.n} exceeds cap {cap}")
    table = _TermTable(inst, ansatz)
    state = plus_state(inst.n, cap=cap)
    psi = state.amplitudes
    dt = sched.dt
    norms: list[float] = []
    audit: list[tuple[float, ...]] = []
    started = time.perf_counter()
    for step, point in enumerate(sched.grid(), 1):
        try:
            values = table.coefficients(point.lam, point.lam_dot)
        except SingularGaugeError as exc:
            raise SingularGaugeError(
                f"{exc} (aborted at grid step {step}/{sched.steps})",
                site=exc.site,
                lam=exc.lam,
                value=exc.value,
                step=step,
            ) from exc
        if audit_cd:
            audit.append(tuple(values[len(table.static_parts):]))
        for comp, value in zip(table.compiled, values):
            comp.apply_exp(psi, dt * value)
        norms.append(float(np.linalg.norm(psi)))
    wall = time.perf_counter() - started
    steps = sched.steps
    return EvolutionReport(
        final_state=state,
        step_norms=tuple(norms),
        operator_applications=len(table.strings) * steps,
        single_per_step=table.single_count,
        entangling_per_step=table.entangling_count,
        single_total=table.single_count * steps,
        entangling_total=table.entangling_count * steps,
        wall_seconds=wall,
        cd_coefficient_table=tuple(audit) if audit_cd else None,
    )


def ode_reference(
    inst: ProblemInstance,
    sched: Schedule,
    ansatz: Ansatz,
    tolerance: float = 1e-10,
    *,
    cap: int = STATEVECTOR_CAP,
) -> StateVector:
    """Adaptive high-order integration of the exact time-dependent flow.

    Independent of the Trotter path: the Schroedinger equation with the
    continuously assembled Hamiltonian is integrated without renormalization,
    so norm drift doubles as an accuracy diagnostic.  Intended for small n.
    """
    if inst.n > cap:
        raise ResourceCapError(f"state vector for n={inst.n} exceeds cap {cap}")
    table = _TermTable(inst, ansatz)

    def rhs(t: float, psi: np.ndarray) -> np.ndarray:
        values = table.coefficients(sched.lam(t), sched.lam_dot(t))
        out = np.zeros_like(psi)
        for comp, value in zip(table.compiled, values):
            if value != 0.0:
                out += value * comp.action(psi)
        return -1j * out

    solution = solve_ivp(
        rhs,
        (0.0, sched.total_time),
        plus_state(inst.n, cap=cap).amplitudes,
        method="DOP853",
        rtol=tolerance,
        atol=tolerance,
    )
    if not solution.success:
        raise IntegratorError(f"reference integration failed: {solution.message}")
    return StateVector(inst.n, solution.y[:, -1].astype(np.complex128))


def success_probability(state: StateVector, truth: GroundTruth) -> float:
    """Total probability on the (possibly degenerate) ground manifold."""
    dim = 1 << state.n
    total = 0.0
    for index in truth.states:
        if not 0 <= index < dim:
            raise DimensionMismatchError(
                f"ground state index {index} out of range for n={state.n}"
            )
        total += float(abs(state.amplitudes[index]) ** 2)
    return total


def sample_shots(state: StateVector, shots: int, seed: int) -> dict[int, int]:
    """Multinomial measurement emulation; deterministic given the seed."""
    if shots < 1:
        raise ParameterError(f"shot count must be >= 1, got {shots}")
    probabilities = np.abs(state.amplitudes) ** 2
    probabilities = probabilities / probabilities.sum()
    counts = np.random.default_rng(seed).multinomial(shots, probabilities)
    return {int(i): int(c) for i, c in enumerate(counts) if c}


def save_state(state: StateVector, path: str | Path) -> None:
    """Binary dump: 16-byte header (magic, n) then little-endian amplitudes."""
    header = _STATE_MAGIC + struct.pack("<Q", state.n)
    data = np.ascontiguousarray(state.amplitudes, dtype="<c16").tobytes()
    Path(path).write_bytes(header + data)


def load_state(path: str | Path) -> StateVector:
    blob = Path(path).read_bytes()
    if len(blob) < 16 or blob[:8] != _STATE_MAGIC:
        raise ParameterError(f"{path}: not a state dump")
    (n,) = struct.unpack("<Q", blob[8:16])
    amplitudes = np.frombuffer(blob[16:], dtype="<c16").astype(np.complex128)
    if amplitudes.size != 1 << n:
        raise ParameterError(
            f"{path}: expected {1 << n} amplitudes, found {amplitudes.size}"
        )
    return StateVector(int(n), amplitudes)
