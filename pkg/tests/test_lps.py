import math

import numpy as np
import pytest

from tensorlab.errors import InvalidArgumentError, UnsupportedParameterError
from tensorlab.services.linalg import haar_su2, unitarity_defect
from tensorlab.services.lps import (
    IntegerQuaternion,
    SU2Element,
    build_lps_tower,
    character,
    clebsch_gordan_check,
    cross_tensor_norm,
    cross_tensor_report,
    export_tower,
    irrep_matrix,
    lps_quaternions,
    quaternion_to_su2,
    rho_block_norm,
    so3_degrees,
    su2_to_so3,
    tower_from_generators,
)

RAMANUJAN_5 = 2 * math.sqrt(5)


@pytest.fixture(scope="module")
def tower5():
    return build_lps_tower(5, 40)


def random_su2(seed) -> SU2Element:
    return SU2Element(haar_su2(seed))


def diag_su2(theta: float) -> SU2Element:
    return SU2Element(np.diag([np.exp(1j * theta), np.exp(-1j * theta)]))


class TestQuaternions:

    def test_p5(self):
        quats = {q.as_tuple() for q in lps_quaternions(5)}
        assert quats == {
            (1, 2, 0, 0), (1, -2, 0, 0),
            (1, 0, 2, 0), (1, 0, -2, 0),
            (1, 0, 0, 2), (1, 0, 0, -2),
        }

    @pytest.mark.parametrize("p", [5, 13, 17, 29])
    def test_count_and_normal_form(self, p):
        quats = lps_quaternions(p)
        assert len(quats) == p + 1
        assert len(set(quats)) == p + 1
        for q in quats:
            assert q.norm == p
            assert q.a > 0 and q.a % 2 == 1
            assert q.b % 2 == 0 and q.c % 2 == 0 and q.d % 2 == 0
            assert q.conjugate() in quats

    @pytest.mark.parametrize("p", [3, 7, 9, 2, 21])
    def test_unsupported_primes(self, p):
        with pytest.raises(UnsupportedParameterError):
            lps_quaternions(p)

    def test_multiplication(self):
        i = IntegerQuaternion(0, 1, 0, 0)
        j = IntegerQuaternion(0, 0, 1, 0)
        k = IntegerQuaternion(0, 0, 0, 1)
        assert i * j == k
        assert j * k == i
        assert i * i == IntegerQuaternion(-1, 0, 0, 0)
        q = IntegerQuaternion(1, 2, 0, 0)
        assert (q * q.conjugate()).as_tuple() == (5, 0, 0, 0)


class TestEmbeddings:

    def test_unit_quaternion(self):
        g = quaternion_to_su2(IntegerQuaternion(1, 0, 0, 0), 1)
        assert np.allclose(g.mat, np.eye(2))

    def test_trace(self):
        g = quaternion_to_su2(IntegerQuaternion(1, 2, 0, 0), 5)
        assert g.trace == pytest.approx(2 / math.sqrt(5), abs=1e-12)
        assert unitarity_defect(g.mat) <= 1e-12

    def test_conjugate_is_inverse(self):
        for q in lps_quaternions(13):
            g = quaternion_to_su2(q, 13)
            h = quaternion_to_su2(q.conjugate(), 13)
            assert np.allclose(g.mat @ h.mat, np.eye(2), atol=1e-12)

    def test_norm_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            quaternion_to_su2(IntegerQuaternion(1, 2, 0, 0), 7)

    def test_homomorphism(self):
        q1, q2 = lps_quaternions(5)[0], lps_quaternions(5)[2]
        product = quaternion_to_su2(q1 * q2, 25)
        assert np.allclose(product.mat, (quaternion_to_su2(q1, 5) @ quaternion_to_su2(q2, 5)).mat)

    def test_su2_validation(self):
        with pytest.raises(InvalidArgumentError):
            SU2Element(np.diag([1.0, 1.0j]))
        with pytest.raises(InvalidArgumentError):
            SU2Element(np.eye(3))

    def test_so3_identity_and_kernel(self):
        assert np.allclose(su2_to_so3(SU2Element(np.eye(2))), np.eye(3))
        assert np.allclose(su2_to_so3(SU2Element(-np.eye(2))), np.eye(3))

    @pytest.mark.parametrize("seed", range(5))
    def test_so3_character(self, seed):
        g = random_su2(seed)
        rot = su2_to_so3(g)
        assert np.trace(rot) == pytest.approx(abs(np.trace(g.mat)) ** 2 - 1, abs=1e-9)
        assert np.allclose(rot @ rot.T, np.eye(3), atol=1e-10)
        assert np.linalg.det(rot) == pytest.approx(1.0, abs=1e-10)
        minus = SU2Element(-g.mat)
        assert np.allclose(su2_to_so3(minus), rot)


class TestIrreps:

    def test_trivial(self):
        assert np.allclose(irrep_matrix(random_su2(1), 0).matrix, [[1.0]])

    def test_defining(self):
        g = random_su2(2)
        assert np.allclose(irrep_matrix(g, 1).matrix, g.mat)

    @pytest.mark.parametrize("m", range(0, 21))
    def test_character_on_diagonal(self, m):
        theta = 0.37
        trace = irrep_matrix(diag_su2(theta), m).trace
        assert trace.real == pytest.approx(math.sin((m + 1) * theta) / math.sin(theta), abs=1e-9)
        assert abs(trace.imag) <= 1e-9

    @pytest.mark.parametrize("m", range(0, 21))
    def test_character_closed_form(self, m):
        g = random_su2(m + 100)
        assert irrep_matrix(g, m).trace.real == pytest.approx(character(g, m), abs=1e-9)

    def test_character_at_poles(self):
        assert character(SU2Element(np.eye(2)), 4) == pytest.approx(5.0)
        assert character(SU2Element(-np.eye(2)), 3) == pytest.approx(-4.0)

    @pytest.mark.parametrize("m", [1, 2, 3, 5, 8, 13, 20])
    def test_multiplicative_and_unitary(self, m):
        rng = np.random.default_rng(m)
        for _ in range(20):
            g = SU2Element(haar_su2(rng))
            h = SU2Element(haar_su2(rng))
            pg, ph = irrep_matrix(g, m).matrix, irrep_matrix(h, m).matrix
            assert np.abs(irrep_matrix(g @ h, m).matrix - pg @ ph).max() <= 1e-8
            assert unitarity_defect(pg) <= 1e-9

    def test_high_degree_unitary(self, tower5):
        for block in tower5.block(40):
            assert unitarity_defect(block.matrix) <= 1e-9

    @pytest.mark.parametrize("m", [0, 1, 2, 7, 40])
    def test_minus_identity(self, m):
        block = irrep_matrix(SU2Element(-np.eye(2)), m).matrix
        assert np.allclose(block, (-1) ** m * np.eye(m + 1), atol=1e-12)

    def test_negative_degree(self):
        with pytest.raises(InvalidArgumentError):
            irrep_matrix(random_su2(1), -1)


class TestClebschGordan:

    def test_trivial_pairs(self):
        assert clebsch_gordan_check(0, 0, 20, 1) <= 1e-10
        assert clebsch_gordan_check(1, 0, 20, 2) <= 1e-10

    def test_defining_pair(self):
        assert clebsch_gordan_check(1, 1, 50, 3) <= 1e-9

    def test_small_grid(self):
        for m in range(0, 5):
            for mp in range(0, 5):
                assert clebsch_gordan_check(m, mp, 20, m * 10 + mp) <= 1e-8

    @pytest.mark.slow
    def test_full_grid(self):
        for m in range(0, 11):
            for mp in range(0, 11):
                assert clebsch_gordan_check(m, mp, 100, m * 11 + mp) <= 1e-8


class TestTower:

    def test_structure(self, tower5):
        assert tower5.n == 6
        assert tower5.cutoff == 40
        assert tower5.is_inverse_closed()
        for m in (0, 1, 7, 40):
            assert len(tower5.block(m)) == 6
            assert tower5.block(m)[0].dim == m + 1

    def test_blocks_are_recomputable(self, tower5):
        for m in (3, 10):
            for g, block in zip(tower5.generators, tower5.block(m)):
                assert np.allclose(irrep_matrix(g, m).matrix, block.matrix)

    def test_block_sums_are_self_adjoint(self, tower5):
        for m in range(0, 41):
            total = sum(tower5.block_matrices(m))
            assert np.abs(total - total.conj().T).max() <= 1e-9

    def test_constants_block(self, tower5):
        with pytest.raises(InvalidArgumentError):
            rho_block_norm(tower5, 0)
        assert rho_block_norm(tower5, 0, strict=False) == pytest.approx(6.0)

    def test_low_blocks(self, tower5):
        assert rho_block_norm(tower5, 1) == pytest.approx(6 / math.sqrt(5), abs=1e-9)
        assert rho_block_norm(tower5, 2) == pytest.approx(0.4, abs=1e-9)

    def test_ramanujan_bound_on_every_block(self, tower5):
        values = [rho_block_norm(tower5, m) for m in range(1, 41)]
        assert max(values) <= RAMANUJAN_5 + 1e-6

    def test_block_norms_approach_ramanujan_bound(self, tower5):
        assert max(rho_block_norm(tower5, m) for m in range(1, 41)) >= RAMANUJAN_5 - 0.15

    def test_so3_degrees(self):
        assert so3_degrees(6) == [2, 4, 6]
        assert so3_degrees(1) == []

    def test_generic_tower(self):
        gens = [random_su2(s) for s in range(3)]
        gens += [g.inverse() for g in gens]
        tower = tower_from_generators(gens, 4)
        assert tower.is_inverse_closed()
        assert rho_block_norm(tower, 3) <= 6 + 1e-9

    def test_export(self, tower5):
        data = export_tower(tower5)
        assert data["prime"] == 5
        assert data["quaternions"][0] == [1, 2, 0, 0]
        assert all(isinstance(x, int) for q in data["quaternions"] for x in q)
        re, im = data["su2"][0][0][0]
        assert float(re) == tower5.generators[0].mat[0, 0].real
        assert float(im) == tower5.generators[0].mat[0, 0].imag
        assert len(data["so3"]) == 6 and len(data["so3"][0]) == 3


class TestCrossTensorNorm:

    def test_diagonal_pair(self, tower5):
        assert cross_tensor_norm(tower5, 2, 2) >= RAMANUJAN_5 - 1e-4

    def test_trivial_partner(self, tower5):
        for m in (1, 2, 3):
            assert cross_tensor_norm(tower5, m, 0) == pytest.approx(rho_block_norm(tower5, m), abs=1e-6)

    def test_mixed_degrees(self, tower5):
        assert cross_tensor_norm(tower5, 1, 2) <= RAMANUJAN_5 + 1e-4

    def test_every_pair(self, tower5):
        for m in range(0, 9):
            for mp in range(0, 9):
                report = cross_tensor_report(tower5, m, mp)
                if m == mp:
                    assert report.value >= RAMANUJAN_5 - 1e-3
                else:
                    assert report.value <= RAMANUJAN_5 + 1e-3
