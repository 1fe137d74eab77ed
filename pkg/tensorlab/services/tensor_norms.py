"""
Minimal tensor norms of quadratic forms in operators

The element sum_i a_i (x) conj(b_i) of the spatial tensor product acts on
the Hilbert-Schmidt space S2(K, H) as the superoperator

    T(t) = sum_i a_i t b_i^H,        T^*(s) = sum_i a_i^H s b_i,

and its operator norm on S2 is the minimal tensor norm. Everything here is
matrix-free; the dense Kronecker matrix exists only as a small-size oracle.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from tensorlab.config import get_settings
from tensorlab.errors import InstanceTooLargeError, InvalidArgumentError
from tensorlab.models import SolverParams
from tensorlab.services.free_combinatorics import count_identity_patterns, free_norm
from tensorlab.services.linalg import (
    HSMatrix,
    UnitaryFamily,
    as_complex_matrix,
    hs_inner,
    is_psd,
    psd_projection,
    random_psd,
    top_singular_value,
    unitarity_defect,
)
from tensorlab.services.logging import get_logger
from tensorlab.utils import SeedLike, as_rng

logger = get_logger(__name__)

FamilyLike = Union[UnitaryFamily, Sequence[np.ndarray]]


def _members(family: FamilyLike, name: str) -> Tuple[np.ndarray, ...]:
    if isinstance(family, UnitaryFamily):
        return family.members
    members = tuple(as_complex_matrix(x, f"{name} member {i}") for i, x in enumerate(family))
    if not members:
        raise InvalidArgumentError(f"{name} family is empty")
    return members


@dataclass(frozen=True)
class QuadraticForm:
    """
    The pair of families (a_i), (b_i) defining sum_i a_i (x) conj(b_i)

    Members are square; all left members share ``left_dim`` and all right
    members share ``right_dim``. ``unitary`` records whether both sides
    passed the unitarity check.
    """

    left: Tuple[np.ndarray, ...]
    right: Tuple[np.ndarray, ...]
    left_dim: int = field(init=False)
    right_dim: int = field(init=False)
    unitary: bool = field(init=False)

    def __post_init__(self):
        left = _members(self.left, "left")
        right = _members(self.right, "right")
        if len(left) != len(right):
            raise InvalidArgumentError(
                "left and right families need equal counts", {"left": len(left), "right": len(right)}
            )
        left_dim = left[0].shape[0]
        right_dim = right[0].shape[0]
        for side, members, dim in (("left", left, left_dim), ("right", right, right_dim)):
            for i, x in enumerate(members):
                if x.shape != (dim, dim):
                    raise InvalidArgumentError(
                        f"{side} members must share one square shape",
                        {"member": i, "shape": list(x.shape), "expected": [dim, dim]},
                    )

        tol = get_settings().UNITARITY_TOL
        unitary = all(
            unitarity_defect(x) <= tol * np.sqrt(x.shape[0]) for x in left + right
        )

        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "left_dim", left_dim)
        object.__setattr__(self, "right_dim", right_dim)
        object.__setattr__(self, "unitary", unitary)

    @classmethod
    def of(cls, a: FamilyLike, b: Optional[FamilyLike] = None) -> "QuadraticForm":
        """Form sum a_i (x) conj(b_i); b defaults to a"""
        return cls(_members(a, "left"), _members(b if b is not None else a, "right"))

    @property
    def n(self) -> int:
        return len(self.left)

    @property
    def shape(self) -> Tuple[int, int]:
        """Shape of the matrices t the form acts on"""
        return self.left_dim, self.right_dim


@dataclass(frozen=True)
class NormReport:
    """Result of one minimal tensor norm evaluation"""

    value: float
    converged: bool
    iterations: int
    witness: HSMatrix
    lower_bound_2sqrt: float
    upper_bound_n: float

    @property
    def gap(self) -> float:
        """Value minus 2 sqrt(n - 1)"""
        return self.value - self.lower_bound_2sqrt


def _check_shape(form: QuadraticForm, t: np.ndarray, expected: Tuple[int, int]) -> np.ndarray:
    t = np.asarray(t, dtype=np.complex128)
    if t.shape != expected:
        raise InvalidArgumentError(
            "matrix shape does not match the form", {"shape": list(t.shape), "expected": list(expected)}
        )
    return t


def superop_apply(form: QuadraticForm, t: Union[HSMatrix, np.ndarray]) -> HSMatrix:
    """
    Apply t -> sum_i a_i t b_i^H

    Args:
        form: Quadratic form
        t: left_dim x right_dim matrix

    Returns:
        Image as an HSMatrix

    Raises:
        InvalidArgumentError: shape mismatch
    """
    mat = t.mat if isinstance(t, HSMatrix) else t
    return HSMatrix(_apply(form, _check_shape(form, mat, form.shape)))


def superop_adjoint_apply(form: QuadraticForm, s: Union[HSMatrix, np.ndarray]) -> HSMatrix:
    """Apply the adjoint s -> sum_i a_i^H s b_i"""
    mat = s.mat if isinstance(s, HSMatrix) else s
    return HSMatrix(_adjoint_apply(form, _check_shape(form, mat, form.shape)))


def _apply(form: QuadraticForm, t: np.ndarray) -> np.ndarray:
    out = np.zeros(form.shape, dtype=np.complex128)
    for a, b in zip(form.left, form.right):
        out += a @ t @ b.conj().T
    return out


def _adjoint_apply(form: QuadraticForm, s: np.ndarray) -> np.ndarray:
    out = np.zeros(form.shape, dtype=np.complex128)
    for a, b in zip(form.left, form.right):
        out += a.conj().T @ s @ b
    return out


def kronecker_matrix(form: QuadraticForm) -> np.ndarray:
    """
    Dense matrix of the superoperator on row-major vectorised t

    Equals sum_i kron(a_i, conj(b_i)). Oracle only.

    Raises:
        InstanceTooLargeError: a dimension exceeds DENSE_ORACLE_MAX_DIM
    """
    limit = get_settings().DENSE_ORACLE_MAX_DIM
    if max(form.left_dim, form.right_dim) > limit:
        raise InstanceTooLargeError(
            "dense superoperator refused", {"left_dim": form.left_dim, "right_dim": form.right_dim, "limit": limit}
        )
    return sum(np.kron(a, b.conj()) for a, b in zip(form.left, form.right))


def min_tensor_norm(form: QuadraticForm, params: Optional[SolverParams] = None) -> NormReport:
    """
    Minimal tensor norm of sum_i a_i (x) conj(b_i)

    Top singular value of the superoperator on S2 by matrix-free power
    iteration. The value is a lower estimate; with unitary families it is
    also checked against the triangle bound n.

    Args:
        form: Quadratic form
        params: Solver parameters, settings defaults when omitted

    Returns:
        NormReport
    """
    params = params or SolverParams.from_settings()
    result = top_singular_value(
        lambda t: _apply(form, t),
        lambda s: _adjoint_apply(form, s),
        form.shape,
        tol=params.tol,
        max_iter=params.max_iter,
        restarts=params.restarts,
        seed=params.seed,
    )

    report = NormReport(
        value=result.value,
        converged=result.converged,
        iterations=result.iterations,
        witness=result.witness,
        lower_bound_2sqrt=free_norm(form.n),
        upper_bound_n=float(form.n),
    )

    if form.unitary and report.value > report.upper_bound_n + 1e-6:
        logger.warning("triangle_bound_exceeded", value=report.value, n=form.n)

    logger.debug(
        "min_tensor_norm",
        n=form.n,
        shape=list(form.shape),
        value=report.value,
        converged=report.converged,
        iterations=report.iterations,
    )
    return report


def _require_unitary(u: FamilyLike) -> UnitaryFamily:
    if isinstance(u, UnitaryFamily):
        return u
    return UnitaryFamily(tuple(u))


def theorem1_gap(u: FamilyLike, params: Optional[SolverParams] = None) -> float:
    """
    ||sum u_i (x) conj(u_i)|| minus 2 sqrt(n - 1)

    Nonnegative for every unitary family up to solver accuracy.

    Raises:
        InvalidArgumentError: a member is not unitary
    """
    family = _require_unitary(u)
    return min_tensor_norm(QuadraticForm.of(family), params).gap


def extended_family(u: FamilyLike, f: FamilyLike) -> UnitaryFamily:
    """
    Member-wise Kronecker product (u_i (x) f_i)

    Tensoring a unitary family with another unitary family gives a unitary
    family, so the lower bound applies to it as well.
    """
    left = _require_unitary(u)
    right = _require_unitary(f)
    if left.n != right.n:
        raise InvalidArgumentError("families need equal counts", {"u": left.n, "f": right.n})
    return UnitaryFamily(tuple(np.kron(a, b) for a, b in zip(left.members, right.members)))


@dataclass(frozen=True)
class HaagerupResult:
    """Both sides of the Cauchy-Schwarz type inequality for tensor norms"""

    lhs: float
    rhs: float
    converged: bool
    iterations: int

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def haagerup_check(
    a: FamilyLike, b: FamilyLike, params: Optional[SolverParams] = None
) -> HaagerupResult:
    """
    Evaluate ||sum a_i (x) conj(b_i)|| against
    ||sum a_i (x) conj(a_i)||^(1/2) ||sum b_i (x) conj(b_i)||^(1/2)
    """
    mixed = min_tensor_norm(QuadraticForm.of(a, b), params)
    left = min_tensor_norm(QuadraticForm.of(a), params)
    right = min_tensor_norm(QuadraticForm.of(b), params)
    return HaagerupResult(
        lhs=mixed.value,
        rhs=float(np.sqrt(left.value) * np.sqrt(right.value)),
        converged=mixed.converged and left.converged and right.converged,
        iterations=mixed.iterations + left.iterations + right.iterations,
    )


def haagerup_slack(a: FamilyLike, b: FamilyLike, params: Optional[SolverParams] = None) -> float:
    """RHS minus LHS of the inequality, >= 0 up to solver accuracy"""
    return haagerup_check(a, b, params).slack


@dataclass(frozen=True)
class AscentResult:
    """Outcome of the alternating ascent over pairs of PSD matrices"""

    value: float
    t: HSMatrix
    s: HSMatrix
    rounds: int
    converged: bool
    history: Tuple[float, ...] = ()


def _cp_map(members: Sequence[np.ndarray], t: np.ndarray) -> np.ndarray:
    return sum(u @ t @ u.conj().T for u in members)


def _project_or_restart(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    p = psd_projection(x)
    if p is None:
        logger.debug("psd_projection_empty_restart")
        return random_psd(x.shape[0], rng).mat
    return p


def _ascent_run(
    family: UnitaryFamily,
    t0: np.ndarray,
    symmetric: bool,
    max_rounds: int,
    rel_tol: float,
    rng: np.random.Generator,
) -> AscentResult:
    members = family.members
    adjoints = family.adjoints()
    shift = float(family.n)
    t = t0
    s = t0
    history = []
    prev = -np.inf

    for rnd in range(1, max_rounds + 1):
        tt = _cp_map(members, t)
        if symmetric:
            value = float(np.vdot(t, tt).real)
            s = t
            nxt = _project_or_restart(tt + shift * t, rng)
        else:
            s = _project_or_restart(tt, rng)
            value = float(np.vdot(s, tt).real)
            nxt = _project_or_restart(_cp_map(adjoints, s), rng)
        history.append(value)
        if value - prev <= rel_tol * abs(value):
            return AscentResult(value, HSMatrix(t), HSMatrix(s), rnd, True, tuple(history))
        prev = value
        t = nxt

    return AscentResult(history[-1], HSMatrix(t), HSMatrix(s), max_rounds, False, tuple(history))


def psd_ascent(
    u: FamilyLike,
    iters: Optional[int] = None,
    seed: SeedLike = 0,
    restarts: Optional[int] = None,
) -> AscentResult:
    """
    sup of tr(sum_i u_i t u_i^H s) over unit-norm PSD t, s

    Alternating maximisation: for fixed t the best s is the normalised
    positive part of sum_i u_i t u_i^H, and symmetrically for t. When the
    family is closed under adjoints the map is self-adjoint and the ascent
    runs on t = s with the shifted update t <- P(T t + n t). Every iterate
    is a lower bound for the tensor norm.

    Args:
        u: Unitary family
        iters: Maximum rounds per start (ASCENT_MAX_ROUNDS by default)
        seed: Seed for the random PSD starts
        restarts: Random PSD starts besides I / sqrt(N)

    Returns:
        AscentResult of the best start
    """
    settings = get_settings()
    family = _require_unitary(u)
    max_rounds = iters if iters is not None else settings.ASCENT_MAX_ROUNDS
    restarts = restarts if restarts is not None else settings.SOLVER_RESTARTS
    rng = as_rng(seed)
    symmetric = family.is_adjoint_closed()

    starts = [np.eye(family.dim, dtype=np.complex128) / np.sqrt(family.dim)]
    starts.extend(random_psd(family.dim, rng).mat for _ in range(restarts))

    best: Optional[AscentResult] = None
    for t0 in starts:
        run = _ascent_run(family, t0, symmetric, max_rounds, settings.ASCENT_REL_TOL, rng)
        if best is None or run.value > best.value:
            best = run

    logger.debug("psd_ascent", n=family.n, dim=family.dim, symmetric=symmetric,
                 value=best.value, rounds=best.rounds)
    return best


def psd_sup_form(u: FamilyLike, iters: Optional[int] = None, seed: SeedLike = 0) -> float:
    """Value of the PSD trace form supremum, see ``psd_ascent``"""
    return psd_ascent(u, iters=iters, seed=seed).value


class SzarekMoment(NamedTuple):
    """<(T^*T)^m t, t> next to the number of formally cancelling patterns"""

    lhs: float
    count: int

    @property
    def holds(self) -> bool:
        return self.lhs >= self.count * (1 - 1e-9) - 1e-9

    def root(self, m: int) -> float:
        """lhs ** (1 / 2m), a lower estimate of the norm"""
        return float(max(self.lhs, 0.0) ** (1.0 / (2 * m)))


def szarek_moment(u: FamilyLike, t: Union[HSMatrix, np.ndarray], m: int) -> SzarekMoment:
    """
    Moment <(T^*T)^m t, t> for T(t) = sum_i u_i t u_i^H

    Computed with 2m alternating applications of T and T^*. Its lower
    bound is the number of index tuples whose free-group word reduces to
    the identity, which is returned alongside.

    Args:
        u: Unitary family
        t: PSD matrix of unit HS norm
        m: Moment order, >= 1

    Raises:
        InvalidArgumentError: t not PSD, not unit norm, or m < 1
    """
    family = _require_unitary(u)
    mat = t.mat if isinstance(t, HSMatrix) else as_complex_matrix(t, "t")
    if int(m) < 1:
        raise InvalidArgumentError("moment order must be >= 1", {"m": m})
    if mat.shape != (family.dim, family.dim):
        raise InvalidArgumentError("t must match the family dimension", {"shape": list(mat.shape)})
    if not is_psd(mat, atol=1e-10 * max(1.0, float(np.linalg.norm(mat)))):
        raise InvalidArgumentError("t must be positive semidefinite")
    if abs(np.linalg.norm(mat) - 1.0) > 1e-9:
        raise InvalidArgumentError("t must have unit HS norm", {"hs_norm": float(np.linalg.norm(mat))})

    form = QuadraticForm.of(family)
    x = mat
    for _ in range(m):
        x = _adjoint_apply(form, _apply(form, x))
    lhs = hs_inner(HSMatrix(x), HSMatrix(mat)).real

    return SzarekMoment(lhs=float(lhs), count=count_identity_patterns(family.n, m))
