import itertools
import math

import numpy as np
import pytest

from tensorlab.errors import InstanceTooLargeError, InvalidArgumentError
from tensorlab.services.free_combinatorics import (
    Letter,
    ReducedWord,
    WalkLattice,
    brute_force_identity_patterns,
    count_identity_patterns,
    free_norm,
    growth_estimate,
    identity_pattern_counts,
    kesten_norm,
    moment_absorption_check,
    reduce_word,
    root_estimate,
    tree_return_count,
    tree_return_counts,
)
from tensorlab.services.linalg import UnitaryFamily, haar_family, haar_unitary

g1, g2 = Letter(1), Letter(2)


def tree_walks_by_words(n: int, m: int) -> int:
    """Closed walks on the Cayley tree of F_n, counted as words that reduce to e"""
    letters = [Letter(i, s) for i in range(1, n + 1) for s in (1, -1)]
    return sum(
        1 for word in itertools.product(letters, repeat=2 * m) if reduce_word(word).is_identity
    )


class TestWords:

    def test_cancelling_pair(self):
        assert reduce_word([g1, g1.inverse()]).is_identity

    def test_empty(self):
        assert reduce_word([]) == ReducedWord(())

    def test_interior_cancellation(self):
        assert reduce_word([g1, g2, g2.inverse(), g1]).letters == (g1, g1)

    def test_nested_cancellation(self):
        word = [g1, g2, g2.inverse(), g1.inverse(), g2]
        assert reduce_word(word).letters == (g2,)

    def test_reduced_word_rejects_inverse_pairs(self):
        with pytest.raises(InvalidArgumentError):
            ReducedWord((g2.inverse(), g2))

    def test_letter_validation(self):
        with pytest.raises(InvalidArgumentError):
            Letter(0)
        with pytest.raises(InvalidArgumentError):
            Letter(1, 2)

    def test_str(self):
        assert str(reduce_word([g1, g2.inverse()])) == "g1 g2^-1"
        assert str(reduce_word([])) == "e"


class TestWalkLattice:

    def test_table_shape_and_parity(self):
        table = WalkLattice(3, 2).table(6)
        assert table[0] == [1]
        for s, row in enumerate(table):
            for d, count in enumerate(row):
                if d > s or (s - d) % 2:
                    assert count == 0

    def test_recurrence(self):
        table = WalkLattice(4, 3).table(5)
        for s in range(1, 6):
            prev = table[s - 1] + [0, 0]
            for d in range(len(table[s])):
                up = prev[d - 1] * (4 if d - 1 == 0 else 3) if d >= 1 else 0
                assert table[s][d] == up + prev[d + 1]

    def test_rolling_rows_match_table(self):
        lattice = WalkLattice(5, 4)
        table = lattice.table(12)
        assert lattice.returns(6) == [table[2 * m][0] for m in range(7)]

    def test_negative_weight_rejected(self):
        with pytest.raises(InvalidArgumentError):
            WalkLattice(-1, 0)


class TestIdentityPatterns:

    @pytest.mark.parametrize("n", range(1, 7))
    def test_first_moment(self, n):
        assert count_identity_patterns(n, 1) == n

    @pytest.mark.parametrize("m", range(0, 8))
    def test_single_generator(self, m):
        assert count_identity_patterns(1, m) == 1

    def test_two_generators(self):
        assert count_identity_patterns(2, 2) == 6
        assert identity_pattern_counts(2, 10) == [math.comb(2 * m, m) for m in range(11)]

    @pytest.mark.parametrize("n", range(1, 7))
    def test_second_moment_closed_form(self, n):
        assert count_identity_patterns(n, 2) == 2 * n * n - n
        assert brute_force_identity_patterns(n, 2) == 2 * n * n - n

    @pytest.mark.parametrize("n,m", [(n, m) for n in range(1, 4) for m in range(0, 6)])
    def test_matches_brute_force(self, n, m):
        assert count_identity_patterns(n, m) == brute_force_identity_patterns(n, m)

    def test_brute_force_small_values(self):
        assert brute_force_identity_patterns(2, 1) == 2
        assert brute_force_identity_patterns(2, 2) == 6

    def test_brute_force_refuses_large_instances(self):
        with pytest.raises(InstanceTooLargeError):
            brute_force_identity_patterns(10, 4)

    def test_counts_positive_and_nondecreasing(self):
        counts = identity_pattern_counts(4, 30)
        assert all(c > 0 for c in counts)
        assert all(b >= a for a, b in zip(counts, counts[1:]))

    def test_exact_beyond_64_bits(self):
        count = count_identity_patterns(2, 40)
        assert isinstance(count, int)
        assert count == math.comb(80, 40)
        assert count > 2 ** 64

    def test_invalid_arguments(self):
        with pytest.raises(InvalidArgumentError):
            count_identity_patterns(0, 2)
        with pytest.raises(InvalidArgumentError):
            count_identity_patterns(2, -1)


class TestTreeReturns:

    def test_line(self):
        assert tree_return_count(2, 1) == 2
        assert tree_return_counts(2, 8) == [math.comb(2 * m, m) for m in range(9)]

    def test_line_by_enumeration(self):
        for m in range(1, 9):
            walks = sum(1 for steps in itertools.product((1, -1), repeat=2 * m) if sum(steps) == 0)
            assert tree_return_count(2, m) == walks

    def test_degree_four(self):
        assert tree_return_count(4, 2) == 28

    @pytest.mark.parametrize("m", range(0, 5))
    def test_cayley_tree_of_free_group(self, m):
        assert tree_return_count(4, m) == tree_walks_by_words(2, m)

    def test_odd_degree(self):
        assert tree_return_count(3, 1) == 3
        assert tree_return_count(3, 2) == 3 * 3 + 3 * 2

    def test_degree_too_small(self):
        with pytest.raises(InvalidArgumentError):
            tree_return_count(1, 2)


class TestGrowth:

    def test_single_generator(self):
        counts = identity_pattern_counts(1, 10)
        assert growth_estimate(counts) == 1.0
        assert root_estimate(counts) == pytest.approx(1.0)

    def test_exact_ratio_two_generators(self):
        counts = identity_pattern_counts(2, 50)
        assert growth_estimate(counts) == pytest.approx(4 - 2 / 50, rel=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_free_group_norm(self, n):
        counts = identity_pattern_counts(n, 400)
        assert math.sqrt(growth_estimate(counts)) == pytest.approx(free_norm(n), rel=0.01)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_kesten_norm(self, n):
        counts = tree_return_counts(2 * n, 400)
        assert math.sqrt(growth_estimate(counts)) == pytest.approx(2 * math.sqrt(2 * n - 1), rel=0.01)
        assert kesten_norm(2 * n) == pytest.approx(2 * math.sqrt(2 * n - 1))

    def test_root_estimate_below_limit(self):
        counts = tree_return_counts(4, 200)
        assert 1.0 < root_estimate(counts) < 12.0
        assert root_estimate(counts) < growth_estimate(counts)

    def test_estimators_need_two_positive_counts(self):
        with pytest.raises(InvalidArgumentError):
            growth_estimate([5])
        with pytest.raises(InvalidArgumentError):
            growth_estimate([0, 1])
        with pytest.raises(InvalidArgumentError):
            root_estimate([1, 0])

    def test_reference_constants(self):
        assert free_norm(1) == 0.0
        assert free_norm(6) == pytest.approx(2 * math.sqrt(5))


class TestMomentAbsorption:

    def test_single_unitary(self):
        family = UnitaryFamily((haar_unitary(3, 4),))
        result = moment_absorption_check(family, 3)
        assert result.moment == pytest.approx(1.0, abs=1e-12)
        assert result.count == 1

    def test_first_moment(self):
        result = moment_absorption_check(haar_family(3, 2, 1), 1)
        assert result.count == 3
        assert result.moment == pytest.approx(3.0, abs=1e-12)

    def test_two_generators(self):
        result = moment_absorption_check(haar_family(2, 3, 7), 2)
        assert result.count == 6
        assert abs(result.moment - 6) <= 1e-8
        assert result.holds

    @pytest.mark.parametrize("n", [1, 2])
    def test_seeded_families(self, n):
        rng = np.random.default_rng(n)
        for _ in range(5):
            family = haar_family(n, 3, rng)
            for m in range(1, 4):
                result = moment_absorption_check(family, m)
                assert abs(result.moment - result.count) <= 1e-8 * result.count

    def test_refuses_large_instances(self):
        with pytest.raises(InstanceTooLargeError):
            moment_absorption_check(haar_family(4, 2, 1), 6)
