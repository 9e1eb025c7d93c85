import numpy as np
import pytest

from projlab import InvalidInput, Subspace, complement, intersect, projector, random_subspace, subspaces_with_angles, sum_of
from projlab.angles import principal_angles
from projlab.subspace import SymmetricOperator, full_space, orthonormalize, zero_subspace

e1, e2, e3 = np.eye(3)


def same_span(S, cols):
    P = projector(S).matrix
    Q = projector(orthonormalize(np.atleast_2d(cols).T)).matrix if len(cols) else np.zeros_like(P)
    return np.allclose(P, Q, atol=1e-12)


class TestOrthonormalize:
    def test_duplicate_direction(self):
        S = orthonormalize(np.array([[1.0, 2.0], [0.0, 0.0]]))
        assert S.dim == 1
        assert np.allclose(np.abs(S.basis[:, 0]), [1, 0])

    def test_already_orthonormal(self):
        S = orthonormalize(np.eye(2))
        assert S.dim == 2
        assert np.allclose(np.abs(S.basis.T @ S.basis), np.eye(2))

    def test_near_duplicate_is_rank_one(self):
        b = np.array([0.6, 0.8])
        S = orthonormalize(np.column_stack([b, b + 1e-16 * np.array([1.0, 0.0])]), tol=1e-10)
        assert S.dim == 1


class TestSubspace:
    def test_rejects_non_orthonormal(self):
        with pytest.raises(InvalidInput):
            Subspace(np.array([[1.0], [1.0]]))

    def test_rejects_perturbed_basis(self):
        with pytest.raises(InvalidInput):
            Subspace(np.array([[1.0 + 1e-3], [0.0]]))

    def test_basis_is_read_only_copy(self):
        raw = np.array([[1.0], [0.0]])
        S = Subspace(raw)
        raw[0, 0] = 5.0
        assert S.basis[0, 0] == 1.0
        with pytest.raises(ValueError):
            S.basis[0, 0] = 2.0

    def test_zero_subspace(self):
        Z = zero_subspace(3)
        assert Z.dim == 0 and Z.ambient_dim == 3
        assert np.array_equal(projector(Z).matrix, np.zeros((3, 3)))

    def test_dict_round_trip_is_bit_identical(self):
        S = random_subspace(7, 3, seed=4)
        T = Subspace.from_dict(S.to_dict())
        assert np.array_equal(S.basis, T.basis)


class TestProjectorAndComplement:
    def test_axis(self):
        assert np.array_equal(projector(Subspace(np.array([[1.0], [0.0]]))).matrix, [[1, 0], [0, 0]])

    def test_oblique_line(self):
        P = projector(Subspace(np.array([[0.6], [0.8]]))).matrix
        assert np.allclose(P, [[0.36, 0.48], [0.48, 0.64]], atol=1e-15)

    def test_complements(self):
        assert same_span(complement(Subspace(np.array([[1.0], [0.0]]))), [np.array([0.0, 1.0])])
        assert complement(full_space(2)).dim == 0
        assert same_span(complement(Subspace(np.array([[0.6], [0.8]]))), [np.array([0.8, -0.6])])


class TestIntersect:
    def test_identical(self):
        A = Subspace(e1[:, None])
        assert same_span(intersect(A, A), [e1])

    def test_orthogonal_lines(self):
        assert intersect(Subspace(e1[:2, None]), Subspace(e2[:2, None])).dim == 0

    def test_shared_axis(self):
        A = Subspace(np.column_stack([e1, e3]))
        B = orthonormalize(np.column_stack([[0.6, 0.8, 0.0], e3]))
        assert same_span(intersect(A, B), [e3])

    def test_sum_of(self):
        S = sum_of(Subspace(e1[:, None]), Subspace(e2[:, None]), Subspace(e1[:, None]))
        assert same_span(S, [e1, e2])


class TestGenerators:
    def test_random_subspace_extremes(self):
        assert random_subspace(5, 0, seed=1).dim == 0
        assert np.allclose(projector(random_subspace(5, 5, seed=7)).matrix, np.eye(5), atol=1e-12)

    def test_random_subspace_deterministic(self):
        assert np.array_equal(random_subspace(6, 3, 11).basis, random_subspace(6, 3, 11).basis)

    def test_single_angle_in_plane(self):
        A, B = subspaces_with_angles(2, [np.arccos(0.6)], seed=3)
        assert np.allclose(principal_angles(A, B).cosines, [0.6], atol=1e-12)

    def test_zero_angle_gives_intersection(self):
        A, B = subspaces_with_angles(3, [0.0, np.arccos(0.6)], seed=5)
        prof = principal_angles(A, B)
        assert intersect(A, B).dim == 1
        assert prof.friedrichs_cos == pytest.approx(0.6, abs=1e-12)

    def test_right_angle_gives_orthogonal_lines(self):
        A, B = subspaces_with_angles(2, [np.pi / 2], seed=0)
        assert np.allclose(projector(A).matrix @ projector(B).matrix, 0, atol=1e-15)

    @pytest.mark.parametrize("angles", [[0.5, 0.2], [-0.1], [2.0], []])
    def test_invalid_angles(self, angles):
        with pytest.raises(InvalidInput):
            subspaces_with_angles(6, angles, seed=0)

    def test_dimension_too_small(self):
        with pytest.raises(InvalidInput):
            subspaces_with_angles(2, [0.3, 0.4], seed=0)


def test_symmetric_operator_checks_symmetry():
    with pytest.raises(InvalidInput):
        SymmetricOperator(np.array([[1.0, 1.0], [0.0, 1.0]]))
    T = SymmetricOperator(np.diag([1.0, 2.0]))
    assert (T + T).norm() == pytest.approx(4.0)
    assert np.allclose(T @ np.ones(2), [1.0, 2.0])
