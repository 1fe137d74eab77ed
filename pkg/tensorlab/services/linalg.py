"""
Dense complex linear algebra substrate

Matrices are numpy ``complex128`` arrays. ``HSMatrix`` views a matrix as a
vector of the Hilbert-Schmidt space S2 with inner product tr(b^H a);
``UnitaryFamily`` is an ordered tuple of N x N unitaries. The top singular
value solver is matrix-free: it only sees a linear map and its adjoint.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy import linalg as sla

from tensorlab.config import get_settings
from tensorlab.errors import ContractViolationError, InvalidArgumentError
from tensorlab.services.logging import get_logger
from tensorlab.utils import SeedLike, as_rng

logger = get_logger(__name__)

LinearMap = Callable[[np.ndarray], np.ndarray]
Shape = Union[int, Tuple[int, int]]


def as_complex_matrix(x, name: str = "matrix") -> np.ndarray:
    """
    Validate and convert to a 2-D complex128 array

    Args:
        x: Array-like input
        name: Name used in error messages

    Returns:
        Contiguous complex128 array

    Raises:
        InvalidArgumentError: not 2-D, empty or not finite
    """
    arr = np.ascontiguousarray(x, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidArgumentError(f"{name} must be a non-empty 2-D array", {"shape": list(arr.shape)})
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class HSMatrix:
    """A matrix regarded as a vector of the Hilbert-Schmidt space"""

    mat: np.ndarray
    hs_norm: float = field(init=False)

    def __post_init__(self):
        mat = as_complex_matrix(self.mat, "HSMatrix")
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "hs_norm", float(np.linalg.norm(mat)))

    @classmethod
    def identity(cls, rows: int, cols: Optional[int] = None) -> "HSMatrix":
        """Identity (rectangular when cols differs) as an HS vector"""
        return cls(np.eye(rows, cols if cols is not None else rows, dtype=np.complex128))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.mat.shape

    def normalized(self) -> "HSMatrix":
        """Unit HS-norm copy"""
        if self.hs_norm == 0.0:
            raise InvalidArgumentError("cannot normalise the zero matrix")
        return HSMatrix(self.mat / self.hs_norm)


@dataclass(frozen=True)
class UnitaryFamily:
    """Ordered n-tuple of N x N unitary matrices"""

    members: Tuple[np.ndarray, ...]
    tol: Optional[float] = None

    def __post_init__(self):
        if len(self.members) < 1:
            raise InvalidArgumentError("a unitary family needs at least one member")
        members = tuple(as_complex_matrix(u, f"member {i}") for i, u in enumerate(self.members))
        dim = members[0].shape[0]
        tol = self.tol if self.tol is not None else get_settings().UNITARITY_TOL
        for i, u in enumerate(members):
            if u.shape != (dim, dim):
                raise InvalidArgumentError(
                    "family members must share one square shape",
                    {"member": i, "shape": list(u.shape), "expected": [dim, dim]},
                )
            defect = unitarity_defect(u)
            if defect > tol * np.sqrt(dim):
                raise InvalidArgumentError("family member is not unitary", {"member": i, "defect": defect})
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "tol", tol)

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def dim(self) -> int:
        return self.members[0].shape[0]

    def adjoints(self) -> List[np.ndarray]:
        return [u.conj().T for u in self.members]

    def is_adjoint_closed(self, atol: float = 1e-10) -> bool:
        """True when every member's adjoint is also a member"""
        for u in self.members:
            ustar = u.conj().T
            if not any(np.allclose(ustar, v, atol=atol, rtol=0.0) for v in self.members):
                return False
        return True


def unitarity_defect(u: np.ndarray) -> float:
    """HS norm of U U^H - I"""
    return float(np.linalg.norm(u @ u.conj().T - np.eye(u.shape[0])))


def hs_inner(a: HSMatrix, b: HSMatrix) -> complex:
    """
    Hilbert-Schmidt inner product tr(b^H a)

    Linear in ``a``, conjugate-linear in ``b``.

    Raises:
        InvalidArgumentError: shape mismatch
    """
    if a.shape != b.shape:
        raise InvalidArgumentError("hs_inner shape mismatch", {"a": list(a.shape), "b": list(b.shape)})
    return complex(np.vdot(b.mat, a.mat))


def haar_unitary(dim: int, seed: SeedLike) -> np.ndarray:
    """
    Sample a Haar-distributed unitary

    Complex Ginibre matrix, QR factorisation, then each column of Q is
    multiplied by the phase of the matching diagonal entry of R so that
    the factorisation is the unique one with positive diagonal.

    Args:
        dim: Matrix size N >= 1
        seed: Integer seed or numpy Generator

    Returns:
        N x N unitary matrix

    Raises:
        InvalidArgumentError: dim < 1
    """
    if int(dim) < 1:
        raise InvalidArgumentError("haar_unitary needs dim >= 1", {"dim": dim})
    rng = as_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = sla.qr(z)
    d = np.diag(r)
    phases = d / np.abs(d)
    return np.ascontiguousarray(q * phases)


def haar_family(n: int, dim: int, seed: SeedLike) -> UnitaryFamily:
    """n independent Haar unitaries drawn in order from one generator"""
    if int(n) < 1:
        raise InvalidArgumentError("haar_family needs n >= 1", {"n": n})
    rng = as_rng(seed)
    return UnitaryFamily(tuple(haar_unitary(dim, rng) for _ in range(n)))


def haar_su2(seed: SeedLike) -> np.ndarray:
    """Haar SU(2) element: a Haar U(2) sample divided by a square root of its determinant"""
    u = haar_unitary(2, seed)
    return u / np.sqrt(np.linalg.det(u))


def adjoint_closure(family: UnitaryFamily) -> UnitaryFamily:
    """(u_1, u_1^*, ..., u_n, u_n^*)"""
    members: List[np.ndarray] = []
    for u in family.members:
        members.extend([u, u.conj().T])
    return UnitaryFamily(tuple(members), tol=family.tol)


def random_psd(dim: int, seed: SeedLike) -> HSMatrix:
    """Random PSD matrix G G^H with unit HS norm"""
    rng = as_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HSMatrix(g @ g.conj().T).normalized()


def psd_projection(x: np.ndarray) -> Optional[np.ndarray]:
    """
    Nearest PSD direction of a square matrix, renormalised in HS norm

    Takes the Hermitian part, clamps negative eigenvalues to zero and
    renormalises. Returns None when nothing positive is left.
    """
    h = (x + x.conj().T) / 2.0
    w, v = sla.eigh(h)
    w = np.clip(w, 0.0, None)
    if not np.any(w > 0.0):
        return None
    p = (v * w) @ v.conj().T
    return p / np.linalg.norm(p)


def is_psd(x: np.ndarray, atol: float = 1e-10) -> bool:
    """Hermitian with no eigenvalue below -atol"""
    if x.shape[0] != x.shape[1]:
        return False
    if not np.allclose(x, x.conj().T, atol=atol, rtol=0.0):
        return False
    return bool(sla.eigvalsh((x + x.conj().T) / 2.0).min() >= -atol)


@dataclass(frozen=True)
class SingularValueResult:
    """Outcome of the power iteration"""

    value: float
    witness: HSMatrix
    converged: bool
    iterations: int
    history: Tuple[float, ...] = ()


def _normalize_shape(shape: Shape) -> Tuple[int, int]:
    if isinstance(shape, (int, np.integer)):
        return int(shape), int(shape)
    rows, cols = shape
    return int(rows), int(cols)


def _random_complex(rng: np.random.Generator, shape: Tuple[int, int]) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def check_adjoint_pair(
    apply: LinearMap,
    adjoint_apply: LinearMap,
    shape: Shape,
    rng: np.random.Generator,
    probes: Optional[int] = None,
    tol: Optional[float] = None,
) -> float:
    """
    Probe that two maps are mutually adjoint for hs_inner

    Checks |<A x, y> - <x, A* y>| <= tol * |x| |y| on random pairs.

    Returns:
        Largest relative defect observed

    Raises:
        ContractViolationError: a probe exceeded the tolerance
    """
    settings = get_settings()
    probes = probes if probes is not None else settings.ADJOINT_PROBES
    tol = tol if tol is not None else settings.ADJOINT_TOL
    in_shape = _normalize_shape(shape)

    worst = 0.0
    for _ in range(probes):
        x = _random_complex(rng, in_shape)
        ax = apply(x)
        y = _random_complex(rng, ax.shape)
        lhs = np.vdot(y, ax)
        rhs = np.vdot(adjoint_apply(y), x)
        scale = np.linalg.norm(x) * np.linalg.norm(y)
        defect = float(abs(lhs - rhs) / scale)
        worst = max(worst, defect)
        if defect > tol:
            raise ContractViolationError(
                "apply and adjoint_apply are not adjoint", {"defect": defect, "tol": tol}
            )
    return worst


def _power_run(
    apply: LinearMap,
    adjoint_apply: LinearMap,
    x0: np.ndarray,
    tol: float,
    max_iter: int,
) -> Tuple[float, np.ndarray, bool, int, List[float]]:
    """Power iteration on adjoint_apply o apply from one start; Rayleigh values are squared"""
    x = x0 / np.linalg.norm(x0)
    history: List[float] = []
    best_x = x
    best = 0.0
    prev: Optional[float] = None

    for it in range(1, max_iter + 1):
        y = apply(x)
        lam = float(np.vdot(y, y).real)
        history.append(lam)
        if lam >= best:
            best, best_x = lam, x
        if prev is not None and abs(lam - prev) < tol:
            return best, best_x, True, it, history
        prev = lam
        z = adjoint_apply(y)
        nz = np.linalg.norm(z)
        if nz == 0.0:
            # x lies in the kernel; every estimate from here on is 0
            return best, best_x, True, it, history
        x = z / nz

    return best, best_x, False, max_iter, history


def top_singular_value(
    apply: LinearMap,
    adjoint_apply: LinearMap,
    shape: Shape,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    restarts: Optional[int] = None,
    seed: SeedLike = 0,
    check_adjoint: bool = True,
) -> SingularValueResult:
    """
    Largest singular value of a matrix-free linear map on S2

    Runs power iteration on the PSD composition adjoint_apply o apply from
    the identity start and from ``restarts`` random starts, and keeps the
    largest Rayleigh quotient. The returned value is always a lower
    estimate of the operator norm.

    Args:
        apply: Linear map on matrices of the given shape
        adjoint_apply: Its adjoint for hs_inner
        shape: Input shape (N or (rows, cols))
        tol: Convergence threshold on successive squared estimates
        max_iter: Iterations per start
        restarts: Random starts besides the identity start
        seed: Seed of the random starts and of the adjointness probe
        check_adjoint: Probe adjointness before iterating

    Returns:
        SingularValueResult; ``converged`` refers to the winning start

    Raises:
        ContractViolationError: the maps are not mutually adjoint
    """
    settings = get_settings()
    tol = tol if tol is not None else settings.SOLVER_TOL
    max_iter = max_iter if max_iter is not None else settings.SOLVER_MAX_ITER
    restarts = restarts if restarts is not None else settings.SOLVER_RESTARTS
    in_shape = _normalize_shape(shape)
    rng = as_rng(seed)

    if check_adjoint:
        check_adjoint_pair(apply, adjoint_apply, in_shape, rng)

    starts = [np.eye(*in_shape, dtype=np.complex128)]
    starts.extend(_random_complex(rng, in_shape) for _ in range(restarts))

    best: Optional[Tuple[float, np.ndarray, bool, int, List[float]]] = None
    for x0 in starts:
        run = _power_run(apply, adjoint_apply, x0, tol, max_iter)
        if best is None or run[0] > best[0]:
            best = run

    lam, x, converged, iterations, history = best
    if not converged:
        logger.warning("power_iteration_not_converged", iterations=iterations, estimate=float(np.sqrt(lam)))

    return SingularValueResult(
        value=float(np.sqrt(max(lam, 0.0))),
        witness=HSMatrix(x),
        converged=converged,
        iterations=iterations,
        history=tuple(history),
    )
