"""Counterdiabatic driving operators for the interpolated spin-glass problem.

Three constructions are provided on top of the same driven Hamiltonian
``H(lam) = (1-lam) * mixer + lam * problem``:

* a closed-form single-site Y family whose per-site coefficients solve the
  quadratic action minimization exactly (the normal equations decouple site
  by site),
* the first-order nested-commutator family, a single global coefficient on
  the fixed operator i[H, dH], again in closed form,
* a general 2-local variational family spanning {Y_i}, symmetrized {Z_i Y_j},
  and symmetrized {X_i Y_j}, solved by least squares.

The action being minimized is S = Tr[G^2] / 2^n with
G = dH + i[A, H]; it is quadratic in the ansatz coefficients, so the solver
reduces to a small symmetric linear system.  Every family produces operators
whose strings carry an odd number of Y factors, hence purely imaginary
off-diagonals: the driving is deliberately non-stoquastic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ParameterError, ResourceCapError, SingularGaugeError
from .pauli import PauliString, PauliSum, commutator, trace_inner
from .problem import ProblemInstance, mixer_hamiltonian, problem_hamiltonian

#: Denominators with magnitude below this raise ``SingularGaugeError``.
SINGULAR_FLOOR = 1e-10

#: Relative condition threshold that switches the solver to a pseudo-inverse.
CONDITION_THRESHOLD = 1e12

#: Default cap on generated nested-commutator strings per term.
NC_STRING_CAP = 10**6

#: Default cap on the nested-commutator expansion order; raise explicitly to
#: generate deeper terms (term count grows steeply with order).
NC_ORDER_CAP = 2


class Ansatz(str, Enum):
    """Counterdiabatic family selector."""

    NONE = "none"
    LOCAL_Y = "local-y"
    NC1 = "nc1"
    TWO_LOCAL = "two-local"

    @classmethod
    def parse(cls, tag: str) -> "Ansatz":
        try:
            return cls(tag)
        except ValueError:
            valid = ", ".join(a.value for a in cls)
            raise ParameterError(f"unknown ansatz {tag!r}; valid tags: {valid}")


@dataclass(frozen=True)
class GaugeSolution:
    """Variational coefficients plus the residual action they achieve."""

    coefficients: dict[str, float]
    residual_action: float
    lam: float | None = None
    condition_warning: bool = False
    labels: tuple[str, ...] = field(default=(), repr=False)

    def vector(self) -> np.ndarray:
        return np.array([self.coefficients[lbl] for lbl in self.labels])


def adiabatic_pair(inst: ProblemInstance, lam: float) -> tuple[PauliSum, PauliSum]:
    """The driven Hamiltonian at ``lam`` (no CD) and its lam derivative."""
    problem = problem_hamiltonian(inst)
    mixer = mixer_hamiltonian(inst.n)
    return (1.0 - lam) * mixer + lam * problem, problem - mixer


def local_y_coefficients(
    inst: ProblemInstance, lam: float, *, floor: float = SINGULAR_FLOOR
) -> np.ndarray:
    """Closed-form per-site coefficients of the single-site Y family.

    beta_i = h_i / (2 [ (lam-1)^2 + lam^2 (h_i^2 + sum_{j != i} J_ij^2) ]).
    The joint least-squares problem over {Y_i} has a diagonal normal matrix,
    so this site-wise form is the exact joint minimizer.
    """
    h = inst.field_array()
    j2_row = (inst.coupling_matrix() ** 2).sum(axis=1)
    denominator = 2.0 * ((lam - 1.0) ** 2 + lam**2 * (h**2 + j2_row))
    small = np.flatnonzero(np.abs(denominator) < floor)
    if small.size:
        site = int(small[0])
        raise SingularGaugeError(
            f"single-site Y denominator {denominator[site]:.3e} below floor "
            f"{floor:.0e} at site {site}, lam={lam}",
            site=site,
            lam=lam,
            value=float(denominator[site]),
        )
    return h / denominator


def nc1_coefficient(
    inst: ProblemInstance, lam: float, *, floor: float = SINGULAR_FLOOR
) -> float:
    """Closed-form global coefficient of the first-order nested-commutator family.

    alpha_1 = -(1/4) [sum h_i^2 + 2 sum_{i<j} J_ij^2] / R(lam) with

    R = (1 - 2 lam) [sum h_i^2 + 8 sum J_ij^2]
        + lam^2 [sum h_i^2 + sum h_i^4 + 8 sum J_ij^2 + 2 sum J_ij^4
                 + 6 sum_{i != j} h_i^2 J_ij^2 + 6 C],

    where C sums J_ij^2 J_kl^2 over unordered pairs of distinct couplings
    sharing exactly one site (equivalently sum_a sum_{b<c, b,c != a}
    J_ab^2 J_ac^2).  This reading of the shared-index constraint is the one
    that reproduces the variational normal equations; ``minimize_action`` on
    the single nested-commutator basis operator is the authoritative oracle
    and the validation suite checks the two against each other.
    """
    h = inst.field_array()
    jmat = inst.coupling_matrix()
    j2 = jmat**2
    sum_h2 = float((h**2).sum())
    sum_h4 = float((h**4).sum())
    sum_j2 = float(j2.sum()) / 2.0
    sum_j4 = float((j2**2).sum()) / 2.0
    cross_hj = float((h**2 @ j2.sum(axis=1)))
    row_j2 = j2.sum(axis=1)
    shared_site = float(((row_j2**2 - (j2**2).sum(axis=1)).sum()) / 2.0)

    quadratic = sum_h2 + 8.0 * sum_j2
    quartic = (
        sum_h2
        + sum_h4
        + 8.0 * sum_j2
        + 2.0 * sum_j4
        + 6.0 * cross_hj
        + 6.0 * shared_site
    )
    denominator = (1.0 - 2.0 * lam) * quadratic + lam**2 * quartic
    if abs(denominator) < floor:
        raise SingularGaugeError(
            f"nested-commutator denominator {denominator:.3e} below floor "
            f"{floor:.0e} at lam={lam}",
            lam=lam,
            value=float(denominator),
        )
    return -0.25 * (sum_h2 + 2.0 * sum_j2) / denominator


def nc_ansatz_terms(
    H: PauliSum,
    dH: PauliSum,
    order: int,
    *,
    string_cap: int = NC_STRING_CAP,
    order_cap: int = NC_ORDER_CAP,
) -> list[PauliSum]:
    """Nested-commutator basis operators up to ``order``.

    Term k is i times the (2k-1)-fold nested commutator of H with dH; odd
    depth makes each term Hermitian, and every generated string carries an
    odd number of Y factors because H and dH are real.
    """
    if order < 1:
        raise ParameterError(f"order must be >= 1, got {order}")
    if order > order_cap:
        raise ResourceCapError(
            f"expansion order {order} exceeds cap {order_cap}; pass order_cap "
            f"explicitly to go deeper"
        )
    if not H.is_hermitian() or not dH.is_hermitian():
        raise ParameterError("nested-commutator generation requires Hermitian inputs")
    terms: list[PauliSum] = []
    current = dH
    depth = 0
    for k in range(1, order + 1):
        while depth < 2 * k - 1:
            current = commutator(H, current)
            depth += 1
            if len(current) > string_cap:
                raise ResourceCapError(
                    f"nested commutator at depth {depth} has {len(current)} "
                    f"strings, cap {string_cap}"
                )
        terms.append(1j * current)
    return terms


def minimize_action(
    basis: list[PauliSum],
    H: PauliSum,
    dH: PauliSum,
    *,
    labels: tuple[str, ...] | list[str] | None = None,
    lam: float | None = None,
    cond_threshold: float = CONDITION_THRESHOLD,
) -> GaugeSolution:
    """Least-squares coefficients minimizing S = Tr[(dH + i[A, H])^2] / 2^n.

    With A = sum_b c_b B_b and L_b = i[B_b, H], the action is quadratic in c,
    so the minimizer solves M c = -v with M_bb' = <L_b, L_b'> and
    v_b = <dH, L_b>.  A symmetric eigendecomposition handles the solve;
    eigenvalues below max(eig)/cond_threshold are truncated (pseudo-inverse
    path) and flagged via ``condition_warning``.
    """
    if not basis:
        raise ParameterError("variational basis must be non-empty")
    for op in basis:
        if not op.is_hermitian():
            raise ParameterError("variational basis operators must be Hermitian")
    if labels is None:
        labels = tuple(f"b{i}" for i in range(len(basis)))
    labels = tuple(labels)
    if len(labels) != len(basis):
        raise ParameterError("labels must align with the basis")

    images = [1j * commutator(op, H) for op in basis]
    size = len(basis)
    gram = np.empty((size, size))
    for a in range(size):
        for b in range(a, size):
            value = trace_inner(images[a], images[b]).real
            gram[a, b] = gram[b, a] = value
    source = np.array([trace_inner(dH, img).real for img in images])

    eigenvalues, eigenvectors = np.linalg.eigh(gram)
    top = float(eigenvalues.max(initial=0.0))
    cutoff = top / cond_threshold if top > 0.0 else 0.0
    keep = eigenvalues > cutoff
    condition_warning = bool((~keep).any())
    projected = eigenvectors.T @ (-source)
    scaled = np.where(keep, projected / np.where(keep, eigenvalues, 1.0), 0.0)
    coefficients = eigenvectors @ scaled

    residual_op = dH
    for c, img in zip(coefficients, images):
        residual_op = residual_op + float(c) * img
    residual = max(0.0, trace_inner(residual_op, residual_op).real)

    return GaugeSolution(
        coefficients={lbl: float(c) for lbl, c in zip(labels, coefficients)},
        residual_action=residual,
        lam=lam,
        condition_warning=condition_warning,
        labels=labels,
    )


def two_local_basis(n: int) -> tuple[list[PauliSum], list[str]]:
    """Symmetrized 2-local basis: {Y_i}, {Z_i Y_j + Z_j Y_i}, {X_i Y_j + X_j Y_i}."""
    if n < 2:
        raise ParameterError(f"the 2-local family needs n >= 2, got {n}")
    basis: list[PauliSum] = []
    labels: list[str] = []
    for i in range(n):
        basis.append(PauliSum(n, {PauliString.single(n, i, "Y"): 1.0}))
        labels.append(f"y{i}")
    for i in range(n):
        for j in range(i + 1, n):
            basis.append(
                PauliSum(
                    n,
                    {
                        _two_site(n, i, "Y", j, "Z"): 1.0,
                        _two_site(n, i, "Z", j, "Y"): 1.0,
                    },
                )
            )
            labels.append(f"zy{i},{j}")
    for i in range(n):
        for j in range(i + 1, n):
            basis.append(
                PauliSum(
                    n,
                    {
                        _two_site(n, i, "X", j, "Y"): 1.0,
                        _two_site(n, i, "Y", j, "X"): 1.0,
                    },
                )
            )
            labels.append(f"xy{i},{j}")
    return basis, labels


def two_local_cd(inst: ProblemInstance, lam: float) -> tuple[PauliSum, GaugeSolution]:
    """Variationally optimal 2-local CD operator (rate factor applied later)."""
    basis, labels = two_local_basis(inst.n)
    H, dH = adiabatic_pair(inst, lam)
    solution = minimize_action(basis, H, dH, labels=labels, lam=lam)
    operator = PauliSum.zero(inst.n)
    for op, lbl in zip(basis, labels):
        operator = operator + solution.coefficients[lbl] * op
    return operator, solution


def cd_terms(inst: ProblemInstance, ansatz: Ansatz) -> list[PauliString]:
    """Static string structure of the CD operator, in canonical order.

    Canonical order: Y by ascending site, then per coupling (i<j) the pair
    (Y_i Z_j, Z_i Y_j), then per pair the (X_i Y_j, Y_i X_j) family.  Sources
    that are exactly zero for the whole protocol (h_i = 0 for a Y term,
    J_ij = 0 for a coupling term) are dropped for the closed-form families.
    """
    n = inst.n
    if ansatz is Ansatz.NONE:
        return []
    if ansatz is Ansatz.LOCAL_Y:
        return [
            PauliString.single(n, i, "Y") for i in range(n) if inst.fields[i] != 0.0
        ]
    if ansatz is Ansatz.NC1:
        strings = [
            PauliString.single(n, i, "Y") for i in range(n) if inst.fields[i] != 0.0
        ]
        for i, j, value in inst.couplings:
            if value == 0.0:
                continue
            strings.append(_two_site(n, i, "Y", j, "Z"))
            strings.append(_two_site(n, i, "Z", j, "Y"))
        return strings
    if ansatz is Ansatz.TWO_LOCAL:
        strings = [PauliString.single(n, i, "Y") for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                strings.append(_two_site(n, i, "Y", j, "Z"))
                strings.append(_two_site(n, i, "Z", j, "Y"))
        for i in range(n):
            for j in range(i + 1, n):
                strings.append(_two_site(n, i, "X", j, "Y"))
                strings.append(_two_site(n, i, "Y", j, "X"))
        return strings
    raise ParameterError(f"unknown ansatz {ansatz!r}")


def cd_coefficients(
    inst: ProblemInstance, ansatz: Ansatz, lam: float, lam_dot: float
) -> np.ndarray:
    """Coefficients aligned with ``cd_terms``, including the lam_dot factor.

    The CD contribution is lam_dot * A(lam), so a zero rate short-circuits to
    zeros without touching any denominator: the driving vanishes identically
    there regardless of whether A is well defined.
    """
    strings = cd_terms(inst, ansatz)
    if not strings or lam_dot == 0.0:
        return np.zeros(len(strings))
    n = inst.n
    if ansatz is Ansatz.LOCAL_Y:
        beta = local_y_coefficients(inst, lam)
        return lam_dot * np.array(
            [beta[i] for i in range(n) if inst.fields[i] != 0.0]
        )
    if ansatz is Ansatz.NC1:
        alpha = nc1_coefficient(inst, lam)
        values = [
            -2.0 * lam_dot * alpha * inst.fields[i]
            for i in range(n)
            if inst.fields[i] != 0.0
        ]
        for _, _, value in inst.couplings:
            if value == 0.0:
                continue
            pair_coeff = -2.0 * lam_dot * alpha * value
            values.extend((pair_coeff, pair_coeff))
        return np.array(values)
    if ansatz is Ansatz.TWO_LOCAL:
        _, solution = two_local_cd(inst, lam)
        values = [lam_dot * solution.coefficients[f"y{i}"] for i in range(n)]
        for prefix in ("zy", "xy"):
            for i in range(n):
                for j in range(i + 1, n):
                    c = lam_dot * solution.coefficients[f"{prefix}{i},{j}"]
                    values.extend((c, c))
        return np.array(values)
    raise ParameterError(f"unknown ansatz {ansatz!r}")


def cd_operator(
    inst: ProblemInstance, ansatz: Ansatz, lam: float, lam_dot: float
) -> PauliSum:
    """The CD contribution lam_dot * A(lam) as an operator sum."""
    strings = cd_terms(inst, ansatz)
    values = cd_coefficients(inst, ansatz, lam, lam_dot)
    return PauliSum(inst.n, zip(strings, values))


def assemble_hamiltonian(
    inst: ProblemInstance, lam: float, lam_dot: float, ansatz: Ansatz
) -> PauliSum:
    """(1-lam) * mixer + lam * problem + CD contribution.

    With ``lam_dot = 0`` the result is exactly the undriven interpolation for
    every ansatz choice.
    """
    if not -1e-12 <= lam <= 1.0 + 1e-12:
        raise ParameterError(f"lam must lie in [0, 1], got {lam}")
    lam = min(max(lam, 0.0), 1.0)
    base = (1.0 - lam) * mixer_hamiltonian(inst.n) + lam * problem_hamiltonian(inst)
    if ansatz is Ansatz.NONE or lam_dot == 0.0:
        return base
    return base + cd_operator(inst, ansatz, lam, lam_dot)


def _two_site(n: int, i: int, axis_i: str, j: int, axis_j: str) -> PauliString:
    xi, zi = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}[axis_i]
    xj, zj = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}[axis_j]
    return PauliString(n, (xi << i) | (xj << j), (zi << i) | (zj << j))
