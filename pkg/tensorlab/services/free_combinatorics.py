"""
Exact combinatorics of the free group F_n

Counting index tuples (i_1, j_1, ..., i_m, j_m) in [n]^(2m) for which the
word g_{i_1}^-1 g_{j_1} ... g_{i_m}^-1 g_{j_m} cancels formally to the
identity reduces to a walk count on the integers:

    Read the word letter by letter, keeping the reduced prefix as a stack.
    After s letters the stack depth d has the parity of s, and letters in
    odd positions are inverses, so the top of the stack has the sign fixed
    by the parity of d while the next letter has the opposite sign. The
    next letter therefore either cancels the top (exactly one choice of
    index) or is pushed (n - 1 choices, or n on the empty stack).

So the count is the weighted number of length-2m walks from depth 0 back
to 0 with weight n for a step up from 0, n - 1 for a step up from d >= 1
and 1 for a step down. Closed walks at the root of the d-regular tree
follow the same lattice with weights d and d - 1.
``brute_force_identity_patterns`` enumerates words to defend the reduction.

All counts are exact Python integers.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Sequence, Tuple

import numpy as np

from tensorlab.config import get_settings
from tensorlab.errors import InstanceTooLargeError, InvalidArgumentError
from tensorlab.services.linalg import UnitaryFamily
from tensorlab.services.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class Letter:
    """Generator g_index (sign +1) or its inverse (sign -1)"""

    index: int
    sign: int = 1

    def __post_init__(self):
        if self.index < 1:
            raise InvalidArgumentError("letter index starts at 1", {"index": self.index})
        if self.sign not in (1, -1):
            raise InvalidArgumentError("letter sign must be +1 or -1", {"sign": self.sign})

    def inverse(self) -> "Letter":
        return Letter(self.index, -self.sign)

    def cancels(self, other: "Letter") -> bool:
        return self.index == other.index and self.sign == -other.sign

    def __str__(self) -> str:
        return f"g{self.index}" if self.sign == 1 else f"g{self.index}^-1"


@dataclass(frozen=True)
class ReducedWord:
    """Freely reduced word; construction rejects adjacent inverse pairs"""

    letters: Tuple[Letter, ...] = ()

    def __post_init__(self):
        letters = tuple(self.letters)
        for left, right in zip(letters, letters[1:]):
            if left.cancels(right):
                raise InvalidArgumentError("word is not reduced", {"pair": [str(left), str(right)]})
        object.__setattr__(self, "letters", letters)

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def __str__(self) -> str:
        return " ".join(str(x) for x in self.letters) or "e"


def reduce_word(letters: Iterable[Letter]) -> ReducedWord:
    """
    Cancel adjacent inverse pairs until none is left

    A single stack pass reaches the same fixed point as any order of
    cancellations, since free reduction is confluent.
    """
    stack: List[Letter] = []
    for letter in letters:
        if stack and stack[-1].cancels(letter):
            stack.pop()
        else:
            stack.append(letter)
    return ReducedWord(tuple(stack))


@dataclass(frozen=True)
class WalkLattice:
    """
    Weighted nonnegative walks on the integers, counted exactly

    ``root_branching`` weights a step up from depth 0, ``deep_branching``
    a step up from depth >= 1; steps down have weight 1.
    """

    root_branching: int
    deep_branching: int

    def __post_init__(self):
        if self.root_branching < 0 or self.deep_branching < 0:
            raise InvalidArgumentError(
                "branching weights must be nonnegative",
                {"root": self.root_branching, "deep": self.deep_branching},
            )

    def _step(self, row: List[int]) -> List[int]:
        nxt = [0] * (len(row) + 1)
        for d, c in enumerate(row):
            if not c:
                continue
            nxt[d + 1] += c * (self.root_branching if d == 0 else self.deep_branching)
            if d > 0:
                nxt[d - 1] += c
        return nxt

    def table(self, steps: int) -> List[List[int]]:
        """Full table[s][d] for s = 0..steps"""
        rows = [[1]]
        for _ in range(steps):
            rows.append(self._step(rows[-1]))
        return rows

    def returns(self, max_half_length: int) -> List[int]:
        """
        Returns to depth 0 after 2m steps for m = 0..max_half_length

        Keeps one rolling row truncated to the depths that can still get
        back to 0.
        """
        total = 2 * max_half_length
        counts = [1]
        row = [1]
        for s in range(1, total + 1):
            row = self._step(row)[: total - s + 1]
            if s % 2 == 0:
                counts.append(row[0])
        return counts

    def return_count(self, m: int) -> int:
        return self.returns(m)[-1]


def _check_nonnegative(**values: int) -> None:
    for name, value in values.items():
        if int(value) < 0:
            raise InvalidArgumentError(f"{name} must be nonnegative", {name: value})


def identity_pattern_counts(n: int, max_m: int) -> List[int]:
    """Identity-pattern counts for m = 0..max_m from one lattice pass"""
    if int(n) < 1:
        raise InvalidArgumentError("n must be >= 1", {"n": n})
    _check_nonnegative(m=max_m)
    return WalkLattice(root_branching=n, deep_branching=n - 1).returns(max_m)


def count_identity_patterns(n: int, m: int) -> int:
    """
    Number of tuples in [n]^(2m) whose alternating word
    g_{i_1}^-1 g_{j_1} ... g_{i_m}^-1 g_{j_m} reduces to the identity

    Args:
        n: Number of free generators, >= 1
        m: Half-length, >= 0

    Returns:
        Exact count
    """
    return identity_pattern_counts(n, m)[-1]


def brute_force_identity_patterns(n: int, m: int) -> int:
    """
    Same count as ``count_identity_patterns`` by enumerating all n^(2m) tuples

    Raises:
        InstanceTooLargeError: n^(2m) above BRUTE_FORCE_LIMIT
    """
    if int(n) < 1:
        raise InvalidArgumentError("n must be >= 1", {"n": n})
    _check_nonnegative(m=m)
    limit = get_settings().BRUTE_FORCE_LIMIT
    size = n ** (2 * m)
    if size > limit:
        raise InstanceTooLargeError("enumeration refused", {"n": n, "m": m, "size": size, "limit": limit})

    total = 0
    for tup in itertools.product(range(1, n + 1), repeat=2 * m):
        if reduce_word(_alternating_word(tup)).is_identity:
            total += 1
    return total


def _alternating_word(tup: Sequence[int]) -> List[Letter]:
    """(i_1, j_1, i_2, ...) -> g_{i_1}^-1 g_{j_1} g_{i_2}^-1 ..."""
    return [Letter(idx, -1 if k % 2 == 0 else 1) for k, idx in enumerate(tup)]


def tree_return_counts(degree: int, max_m: int) -> List[int]:
    """Closed walks of length 2m at the root of the degree-regular tree, m = 0..max_m"""
    if int(degree) < 2:
        raise InvalidArgumentError("tree degree must be >= 2", {"degree": degree})
    _check_nonnegative(m=max_m)
    return WalkLattice(root_branching=degree, deep_branching=degree - 1).returns(max_m)


def tree_return_count(degree: int, m: int) -> int:
    """Closed walks of length 2m at the root of the degree-regular tree"""
    return tree_return_counts(degree, m)[-1]


def _check_counts(counts: Sequence[int]) -> None:
    if len(counts) < 2:
        raise InvalidArgumentError("need at least two consecutive counts", {"length": len(counts)})
    if any(int(c) <= 0 for c in counts):
        raise InvalidArgumentError("counts must be positive")


def growth_estimate(counts: Sequence[int]) -> float:
    """
    Ratio estimator count_{m+1} / count_m of the squared norm

    Uses the last two entries. Take the square root for the norm itself.
    Integer true division keeps huge counts exact up to the final rounding.

    Raises:
        InvalidArgumentError: fewer than two counts or a non-positive count
    """
    _check_counts(counts)
    return int(counts[-1]) / int(counts[-2])


def root_estimate(counts: Sequence[int]) -> float:
    """
    m-th root estimator count_m^(1/m) of the squared norm

    ``counts[k]`` is taken to be the count at m = k; uses the last entry.
    """
    _check_counts(counts)
    m = len(counts) - 1
    return math.exp(math.log(int(counts[-1])) / m)


def free_norm(n: int) -> float:
    """||sum_i lambda(g_i)|| = 2 sqrt(n - 1) for free generators (0 when n = 1)"""
    return 2.0 * math.sqrt(max(int(n) - 1, 0))


def kesten_norm(degree: int) -> float:
    """Spectral radius of the adjacency operator of the degree-regular tree, 2 sqrt(d - 1)"""
    return 2.0 * math.sqrt(max(int(degree) - 1, 0))


class AbsorptionMoment(NamedTuple):
    """Trace moment of sum_i lambda(g_i) (x) conj(u_i) next to the pattern count"""

    moment: float
    count: int

    @property
    def holds(self) -> bool:
        return abs(self.moment - self.count) <= 1e-8 * self.count


def moment_absorption_check(u: UnitaryFamily, m: int) -> AbsorptionMoment:
    """
    (tau (x) tr_N)[(X^* X)^m] for X = sum_i lambda(g_i) (x) conj(u_i)

    Only tuples whose free word cancels to the identity contribute to tau;
    each contributes the normalised trace of the matching word in the
    conjugate unitaries, which is 1 because the same formal cancellation
    happens there. The sum therefore equals the pattern count.

    Raises:
        InstanceTooLargeError: n^(2m) above ABSORPTION_LIMIT
    """
    family = u if isinstance(u, UnitaryFamily) else UnitaryFamily(tuple(u))
    _check_nonnegative(m=m)
    n, dim = family.n, family.dim
    limit = get_settings().ABSORPTION_LIMIT
    size = n ** (2 * m)
    if size > limit:
        raise InstanceTooLargeError("enumeration refused", {"n": n, "m": m, "size": size, "limit": limit})

    conj = [x.conj() for x in family.members]
    conj_inv = [x.T for x in family.members]
    eye = np.eye(dim, dtype=np.complex128)

    moment = 0.0
    for tup in itertools.product(range(n), repeat=2 * m):
        word = _alternating_word([i + 1 for i in tup])
        if not reduce_word(word).is_identity:
            continue
        prod = eye
        for k, idx in enumerate(tup):
            prod = prod @ (conj_inv[idx] if k % 2 == 0 else conj[idx])
        moment += float(np.trace(prod).real) / dim

    result = AbsorptionMoment(moment=moment, count=count_identity_patterns(n, m))
    if not result.holds:
        logger.warning("absorption_moment_mismatch", moment=result.moment, count=result.count, m=m)
    return result
