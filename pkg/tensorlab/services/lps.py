"""
LPS generators and SU(2) irreducible representations

Integer quaternions of prime norm p = 1 (mod 4) give p + 1 elements of
SU(2) (and of SO(3) through the double cover) that are closed under
inverses. Their images under the irreducible representations pi_m, acting
on homogeneous polynomials of degree m in two variables, feed the block
norm and cross tensor norm experiments.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg as sla
from scipy.special import eval_chebyu
from sympy import isprime

from tensorlab.config import get_settings
from tensorlab.errors import InvalidArgumentError, UnsupportedParameterError
from tensorlab.models import SolverParams
from tensorlab.services.linalg import as_complex_matrix, haar_su2, unitarity_defect
from tensorlab.services.logging import get_logger
from tensorlab.services.tensor_norms import NormReport, QuadraticForm, min_tensor_norm
from tensorlab.utils import SeedLike, as_rng

logger = get_logger(__name__)

IRREP_UNITARITY_TOL = 1e-9

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


@dataclass(frozen=True)
class IntegerQuaternion:
    """q = a + b i + c j + d k with integer coefficients"""

    a: int
    b: int
    c: int
    d: int

    @property
    def norm(self) -> int:
        return self.a ** 2 + self.b ** 2 + self.c ** 2 + self.d ** 2

    def conjugate(self) -> "IntegerQuaternion":
        return IntegerQuaternion(self.a, -self.b, -self.c, -self.d)

    def __mul__(self, other: "IntegerQuaternion") -> "IntegerQuaternion":
        a1, b1, c1, d1 = self.as_tuple()
        a2, b2, c2, d2 = other.as_tuple()
        return IntegerQuaternion(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return self.a, self.b, self.c, self.d


@dataclass(frozen=True)
class SU2Element:
    """2 x 2 unitary with determinant 1"""

    mat: np.ndarray
    tol: float = 1e-10

    def __post_init__(self):
        mat = as_complex_matrix(self.mat, "SU2Element")
        if mat.shape != (2, 2):
            raise InvalidArgumentError("SU(2) elements are 2 x 2", {"shape": list(mat.shape)})
        defect = unitarity_defect(mat)
        if defect > self.tol:
            raise InvalidArgumentError("matrix is not unitary", {"defect": defect})
        det = complex(np.linalg.det(mat))
        if abs(det - 1.0) > self.tol:
            raise InvalidArgumentError("determinant is not 1", {"det": [det.real, det.imag]})
        object.__setattr__(self, "mat", mat)

    def __matmul__(self, other: "SU2Element") -> "SU2Element":
        return SU2Element(self.mat @ other.mat, tol=max(self.tol, other.tol))

    def inverse(self) -> "SU2Element":
        return SU2Element(self.mat.conj().T, tol=self.tol)

    @property
    def trace(self) -> float:
        """Trace, real for SU(2)"""
        return float(np.trace(self.mat).real)


@dataclass(frozen=True)
class IrrepMatrix:
    """pi_m(g) on degree-m homogeneous polynomials"""

    degree: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.degree < 0:
            raise InvalidArgumentError("degree must be >= 0", {"degree": self.degree})
        mat = as_complex_matrix(self.matrix, "IrrepMatrix")
        dim = self.degree + 1
        if mat.shape != (dim, dim):
            raise InvalidArgumentError("irrep matrix has the wrong size", {"shape": list(mat.shape), "dim": dim})
        defect = unitarity_defect(mat)
        if defect > IRREP_UNITARITY_TOL:
            raise InvalidArgumentError("irrep matrix is not unitary", {"degree": self.degree, "defect": defect})
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.degree + 1

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


@dataclass(frozen=True)
class RepresentationTower:
    """
    Generators together with their irrep blocks for m = 0..cutoff

    ``blocks[m][i]`` is ``irrep_matrix(generators[i], m)``.
    """

    generators: Tuple[SU2Element, ...]
    blocks: Dict[int, Tuple[IrrepMatrix, ...]] = field(default_factory=dict)
    prime: Optional[int] = None
    quaternions: Tuple[IntegerQuaternion, ...] = ()

    @property
    def n(self) -> int:
        return len(self.generators)

    @property
    def cutoff(self) -> int:
        return max(self.blocks) if self.blocks else -1

    def block(self, m: int) -> Tuple[IrrepMatrix, ...]:
        """Irrep block of degree m, computed when beyond the stored cutoff"""
        if m in self.blocks:
            return self.blocks[m]
        return tuple(irrep_matrix(g, m) for g in self.generators)

    def block_matrices(self, m: int) -> List[np.ndarray]:
        return [x.matrix for x in self.block(m)]

    def is_inverse_closed(self, atol: float = 1e-10) -> bool:
        mats = [g.mat for g in self.generators]
        return all(
            any(np.allclose(g.conj().T, h, atol=atol, rtol=0.0) for h in mats) for g in mats
        )


def lps_quaternions(p: int) -> List[IntegerQuaternion]:
    """
    All a + bi + cj + dk of norm p with a > 0 odd and b, c, d even

    Each quaternion is followed by its conjugate, so the list is closed
    under conjugation and has exactly p + 1 elements.

    Raises:
        UnsupportedParameterError: p not prime or p != 1 (mod 4)
    """
    if not isprime(int(p)) or p % 4 != 1:
        raise UnsupportedParameterError(
            "LPS generators need a prime p with p = 1 (mod 4)", {"p": p}
        )

    bound = math.isqrt(p)
    odd = range(1, bound + 1, 2)
    even = [x for x in range(-bound, bound + 1) if x % 2 == 0]

    found = []
    for a, b, c, d in itertools.product(odd, even, even, even):
        if a * a + b * b + c * c + d * d == p and (b, c, d) > (0, 0, 0):
            found.append(IntegerQuaternion(a, b, c, d))
    found.sort(key=lambda q: (q.a, -q.b, -q.c, -q.d))

    result: List[IntegerQuaternion] = []
    for q in found:
        result.extend([q, q.conjugate()])

    if len(result) != p + 1:
        raise RuntimeError(f"expected {p + 1} quaternions of norm {p}, found {len(result)}")
    return result


def quaternion_to_su2(q: IntegerQuaternion, p: int) -> SU2Element:
    """
    [[a + bi, c + di], [-c + di, a - bi]] / sqrt(p)

    Raises:
        InvalidArgumentError: norm(q) != p
    """
    if q.norm != p:
        raise InvalidArgumentError("quaternion norm does not match p", {"norm": q.norm, "p": p})
    a, b, c, d = q.as_tuple()
    mat = np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]], dtype=np.complex128)
    return SU2Element(mat / math.sqrt(p))


def su2_to_so3(g: SU2Element) -> np.ndarray:
    """
    Rotation R with R[a, b] = tr(sigma_a g sigma_b g^H) / 2

    g and -g give the same rotation.
    """
    u = g.mat
    uh = u.conj().T
    rot = np.empty((3, 3))
    for a, sa in enumerate(PAULI):
        for b, sb in enumerate(PAULI):
            rot[a, b] = 0.5 * np.trace(sa @ u @ sb @ uh).real
    return rot


def _su2_log(u: np.ndarray) -> Tuple[np.ndarray, int]:
    """
    Split u = sign * exp(X) with X traceless anti-Hermitian, rotation angle <= pi / 2

    The sign is taken as -1 when tr(u) < 0 so the angle stays away from pi,
    where the axis of u - u^H degenerates.
    """
    sign = 1
    if np.trace(u).real < 0:
        u, sign = -u, -1
    theta = math.acos(float(np.clip(np.trace(u).real / 2.0, -1.0, 1.0)))
    half = (u - u.conj().T) / 2.0
    # theta / sin(theta), continuous at 0
    return half / np.sinc(theta / math.pi), sign


def irrep_matrix(g: SU2Element, m: int) -> IrrepMatrix:
    """
    Matrix of pi_m(g) in the orthonormal basis e_k = sqrt(C(m, k)) x^(m-k) y^k

    pi_m(g) sends f(x, y) to f((x, y) g), so pi_1(g) = g and
    pi_m(gh) = pi_m(g) pi_m(h). With g = +-exp(X), the derivative of pi_m
    at X is tridiagonal in this basis:

        D[k, k]     = X11 (m - k) + X22 k
        D[k + 1, k] = X21 sqrt((m - k)(k + 1))
        D[k, k + 1] = X12 sqrt((m - k)(k + 1))

    and pi_m(g) = (+-1)^m exp(D), evaluated through the eigendecomposition
    of the Hermitian matrix -iD so the result is unitary to rounding at
    every degree.

    Args:
        g: SU(2) element
        m: Degree, >= 0

    Returns:
        (m + 1) x (m + 1) unitary IrrepMatrix
    """
    if int(m) < 0:
        raise InvalidArgumentError("degree must be >= 0", {"degree": m})
    m = int(m)
    x, sign = _su2_log(g.mat)

    k = np.arange(m + 1)
    off = np.sqrt((m - k[:-1]) * (k[:-1] + 1.0))
    gen = np.diag(x[0, 0] * (m - k) + x[1, 1] * k).astype(np.complex128)
    gen += np.diag(x[1, 0] * off, -1) + np.diag(x[0, 1] * off, 1)

    herm = -1j * gen
    w, v = sla.eigh((herm + herm.conj().T) / 2.0)
    mat = (v * np.exp(1j * w)) @ v.conj().T
    if sign < 0 and m % 2:
        mat = -mat
    return IrrepMatrix(m, mat)


def character(g: SU2Element, m: int) -> float:
    """
    chi_m(g) = sin((m + 1) theta) / sin(theta) where tr(g) = 2 cos(theta)

    Evaluated as the Chebyshev polynomial U_m(tr(g) / 2).
    """
    x = float(np.clip(g.trace / 2.0, -1.0, 1.0))
    return float(eval_chebyu(int(m), x))


def clebsch_gordan_check(m: int, m_prime: int, sample_count: int = 100, seed: SeedLike = 0) -> float:
    """
    Largest |tr(pi_m(g) (x) conj(pi_m'(g))) - sum_k chi_k(g)| over Haar samples

    k runs over |m - m'|, |m - m'| + 2, ..., m + m'.
    """
    if int(m) < 0 or int(m_prime) < 0:
        raise InvalidArgumentError("degrees must be >= 0", {"m": m, "m_prime": m_prime})
    rng = as_rng(seed)
    degrees = range(abs(m - m_prime), m + m_prime + 1, 2)
    worst = 0.0
    for _ in range(sample_count):
        g = SU2Element(haar_su2(rng))
        lhs = np.trace(np.kron(irrep_matrix(g, m).matrix, irrep_matrix(g, m_prime).matrix.conj()))
        rhs = sum(character(g, k) for k in degrees)
        worst = max(worst, float(abs(lhs - rhs)))
    return worst


def so3_degrees(cutoff: int) -> List[int]:
    """Degrees m = 2l, l >= 1, up to cutoff: the blocks that factor through SO(3)"""
    return list(range(2, int(cutoff) + 1, 2))


def build_lps_tower(p: int, cutoff: Optional[int] = None) -> RepresentationTower:
    """
    LPS generators for p with irrep blocks m = 0..cutoff

    Args:
        p: Prime with p = 1 (mod 4)
        cutoff: Highest degree, DEGREE_CUTOFF by default
    """
    cutoff = cutoff if cutoff is not None else get_settings().DEGREE_CUTOFF
    quaternions = lps_quaternions(p)
    generators = tuple(quaternion_to_su2(q, p) for q in quaternions)
    blocks = {m: tuple(irrep_matrix(g, m) for g in generators) for m in range(cutoff + 1)}
    logger.info("lps_tower_built", p=p, generators=len(generators), cutoff=cutoff)
    return RepresentationTower(generators=generators, blocks=blocks, prime=p, quaternions=tuple(quaternions))


def tower_from_generators(generators: Sequence[SU2Element], cutoff: int) -> RepresentationTower:
    """Tower over arbitrary SU(2) generators"""
    gens = tuple(generators)
    blocks = {m: tuple(irrep_matrix(g, m) for g in gens) for m in range(cutoff + 1)}
    return RepresentationTower(generators=gens, blocks=blocks)


def rho_block_norm(tower: RepresentationTower, m: int, strict: bool = True) -> float:
    """
    ||sum_i pi_m(omega_i)||

    When the generators are closed under inverses the sum is self-adjoint
    and its norm is the largest |eigenvalue|.

    Raises:
        InvalidArgumentError: m = 0 with ``strict`` (the constants block)
    """
    if int(m) < 0:
        raise InvalidArgumentError("degree must be >= 0", {"degree": m})
    if m == 0 and strict:
        raise InvalidArgumentError("the constants block m = 0 is excluded", {"degree": m})
    total = sum(tower.block_matrices(m))
    if np.allclose(total, total.conj().T, atol=1e-9, rtol=0.0):
        return float(np.abs(sla.eigvalsh((total + total.conj().T) / 2.0)).max())
    return float(sla.svdvals(total).max())


def cross_tensor_report(
    tower: RepresentationTower, m: int, m_prime: int, params: Optional[SolverParams] = None
) -> NormReport:
    """min_tensor_norm of (pi_m(omega_i)) against (pi_m'(omega_i))"""
    form = QuadraticForm.of(tower.block_matrices(m), tower.block_matrices(m_prime))
    return min_tensor_norm(form, params)


def cross_tensor_norm(
    tower: RepresentationTower, m: int, m_prime: int, params: Optional[SolverParams] = None
) -> float:
    """||sum_i pi_m(omega_i) (x) conj(pi_m'(omega_i))||"""
    return cross_tensor_report(tower, m, m_prime, params).value


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def export_tower(tower: RepresentationTower) -> Dict[str, Any]:
    """
    JSON-ready description of a tower

    Quaternions stay exact integers; matrix entries are decimal strings
    with 17 significant digits, complex entries as [re, im].
    """
    return {
        "prime": tower.prime,
        "n": tower.n,
        "cutoff": tower.cutoff,
        "quaternions": [list(q.as_tuple()) for q in tower.quaternions],
        "su2": [
            [[[_fmt(z.real), _fmt(z.imag)] for z in row] for row in g.mat] for g in tower.generators
        ],
        "so3": [[[_fmt(x) for x in row] for row in su2_to_so3(g)] for g in tower.generators],
    }
