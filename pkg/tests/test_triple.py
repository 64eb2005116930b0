import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_metric.errors import ArgumentError, CapacityError, ContractError
from spectral_metric.matcore import (
    HermitianBasis,
    kron,
    operator_norm,
    pauli,
    pauli_dot,
    random_complex,
    random_hermitian,
    random_traceless_hermitian,
    random_unitary,
)
from spectral_metric.triple import (
    PAULI_PERMUTATIONS,
    SIGN_PATTERNS,
    BallClass,
    D4Level,
    DiracOperator,
    IsometryFlag,
    Representation,
    SpectralTriple,
    ball_class,
    certify_isometry,
    commutator_square,
    conjugate_dirac,
    dirac_corner,
    dirac_d4,
    dirac_d4n,
    dirac_tensor_insert,
    distance_is_finite,
    lipschitz_seminorm,
    pauli_permutation_unitary,
    permutation_unitaries,
    scale_dirac,
    seminorm_invariance_defect,
    seminorm_kernel,
    shift_dirac,
    triple_from_dirac,
    with_isometry,
)

SEEDS = st.integers(min_value=0, max_value=2**32 - 1)


def traceless_qubit(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    e_bar = rng.standard_normal(3)
    return e_bar, pauli_dot(e_bar)


class TestRepresentation:
    def test_images(self):
        a = np.array([[1, 2j], [3, 4]], dtype=complex)
        np.testing.assert_array_equal(Representation.identity(2)(a), a)
        np.testing.assert_array_equal(Representation.diagonal(2, 3)(a), np.kron(np.eye(3), a))
        corner = Representation.corner(2)(a)
        np.testing.assert_array_equal(corner[:2, :2], a)
        assert not np.any(corner[2:, :]) and not np.any(corner[:, 2:])

    def test_custom_from_basis_is_the_identity(self, rng):
        rep = Representation.custom(3, HermitianBasis.gell_mann(3).elements)
        a = random_complex(3, rng)
        np.testing.assert_allclose(rep(a), a, atol=1e-12)
        assert rep.unital

    @pytest.mark.parametrize(
        "rep, unital",
        [
            (Representation.identity(3), True),
            (Representation.diagonal(2, 2), True),
            (Representation.corner(2), False),
        ],
    )
    def test_unital(self, rep, unital):
        assert rep.unital is unital

    def test_rejects_bad_arguments(self):
        with pytest.raises(ArgumentError):
            Representation.diagonal(2, 0)
        with pytest.raises(ArgumentError):
            Representation.custom(2, np.zeros((3, 2, 2)))
        with pytest.raises(ArgumentError):
            Representation.identity(2)(np.eye(3))


class TestDiracOperator:
    def test_stored_traceless_with_shift(self):
        D = np.diag([3.0, 1.0])
        op = DiracOperator.from_matrix(D)
        np.testing.assert_allclose(op.matrix, np.diag([1.0, -1.0]))
        assert op.shift == pytest.approx(2.0)
        np.testing.assert_allclose(op.raw, D)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ArgumentError):
            DiracOperator.from_matrix([[0, 1], [0, 0]])

    def test_dimension_mismatch(self):
        with pytest.raises(ArgumentError):
            SpectralTriple(Representation.identity(2), DiracOperator.from_matrix(np.eye(3)))

    def test_mask_range(self):
        with pytest.raises(ArgumentError):
            triple_from_dirac(Representation.identity(2), pauli(1), allowed=[0, 4])


class TestSeminorm:
    def test_central_dirac_gives_zero(self, rng):
        t = triple_from_dirac(Representation.identity(3), 2.5 * np.eye(3))
        assert lipschitz_seminorm(t, random_hermitian(3, rng)) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_corner_is_operator_norm(self, n, rng):
        t = dirac_corner(n)
        for _ in range(200):
            e = random_complex(n, rng)
            assert lipschitz_seminorm(t, e) == pytest.approx(operator_norm(e), abs=1e-10)

    def test_d4_is_bloch_length(self, d4, rng):
        for _ in range(20):
            e_bar, e = traceless_qubit(rng)
            assert lipschitz_seminorm(d4, e + 0.7 * np.eye(2)) == pytest.approx(np.linalg.norm(e_bar), abs=1e-12)

    def test_two_point(self, two_point):
        assert lipschitz_seminorm(two_point, np.diag([0.4, -0.4])) == pytest.approx(0.4)
        assert lipschitz_seminorm(two_point, np.eye(2)) == pytest.approx(0.0)

    def test_element_shape(self, d4):
        with pytest.raises(ArgumentError):
            lipschitz_seminorm(d4, np.eye(3))

    def test_commutator_square_of_sigma3(self, d4):
        expected = (np.eye(4) - np.kron(pauli(3), pauli(3))) / 2
        np.testing.assert_allclose(commutator_square(d4, pauli(3)), expected, atol=1e-12)

    def test_commutator_square_law(self, d4, rng):
        """C^dag C = 1/2 (|e|^2 I - e (x) e), eigenvalues {0, 0, |e|^2, |e|^2}."""
        for _ in range(100):
            e_bar, e = traceless_qubit(rng)
            r2 = float(e_bar @ e_bar)
            square = commutator_square(d4, e)
            np.testing.assert_allclose(square, (r2 * np.eye(4) - np.kron(e, e)) / 2, atol=1e-12)
            np.testing.assert_allclose(np.linalg.eigvalsh(square), [0, 0, r2, r2], atol=1e-10)


class TestKernel:
    def test_corner_kernel_is_empty(self, corner3):
        assert seminorm_kernel(corner3) == []

    def test_d4_kernel_is_identity(self, d4):
        (k,) = seminorm_kernel(d4)
        np.testing.assert_allclose(k / k[0, 0], np.eye(2), atol=1e-12)

    def test_sigma1_kernel(self, sigma1_triple):
        kernel = seminorm_kernel(sigma1_triple)
        assert len(kernel) == 2
        for k in kernel:
            assert lipschitz_seminorm(sigma1_triple, k) == pytest.approx(0.0, abs=1e-12)
        # sigma_1 lies in the span: fit it by least squares and check the residual
        stacked = np.array([k.ravel() for k in kernel]).T
        coeffs, *_ = np.linalg.lstsq(stacked, pauli(1).ravel(), rcond=None)
        np.testing.assert_allclose(stacked @ coeffs, pauli(1).ravel(), atol=1e-12)

    def test_two_point_kernel(self, two_point):
        assert len(seminorm_kernel(two_point)) == 1

    def test_finiteness(self, sigma1_triple, d4):
        delta = np.array([[1, -1], [-1, -1]]) / 2
        assert not distance_is_finite(sigma1_triple, delta)
        assert distance_is_finite(sigma1_triple, pauli(3))
        assert distance_is_finite(sigma1_triple, np.zeros((2, 2)))
        assert distance_is_finite(d4, delta)

    @pytest.mark.parametrize("k", [1, 10, 100])
    def test_unbounded_objective(self, sigma1_triple, k):
        """k * (-sigma_1) stays feasible while its objective grows like k."""
        delta = np.array([[1, -1], [-1, -1]]) / 2
        e = -k * pauli(1)
        assert lipschitz_seminorm(sigma1_triple, e) == pytest.approx(0.0, abs=1e-12)
        assert np.trace(delta @ e).real == pytest.approx(k)


class TestBallClass:
    @pytest.mark.parametrize(
        "scale, expected",
        [(0.5, BallClass.INTERIOR), (1.0, BallClass.BOUNDARY), (2.0, BallClass.OUTSIDE)],
    )
    def test_corner(self, corner3, scale, expected):
        assert ball_class(corner3, scale * np.diag([1.0, -1.0, 0.0])) == expected

    def test_closed_under_conjugation(self, d4, rng):
        for _ in range(20):
            e = random_hermitian(2, rng)
            U = random_unitary(2, rng)
            assert ball_class(d4, e) == ball_class(d4, U @ e @ U.conj().T)


class TestIsometry:
    @pytest.mark.parametrize(
        "fixture, flag",
        [
            ("corner3", IsometryFlag.ON_ALL),
            ("d4", IsometryFlag.ON_TRACELESS),
            ("two_point", IsometryFlag.ON_TRACELESS),
            ("sigma1_triple", IsometryFlag.NO),
        ],
    )
    def test_certified_flag(self, fixture, flag, request):
        t = request.getfixturevalue(fixture)
        certified, _ = certify_isometry(t, trials=50)
        assert certified == flag
        assert t.isometric == flag

    def test_with_isometry_weakens_freely(self, d4):
        weakened = with_isometry(d4, IsometryFlag.NO)
        assert weakened.isometric == IsometryFlag.NO
        assert len(weakened.kernel_basis) == len(d4.kernel_basis)

    def test_with_isometry_certifies_a_stronger_flag(self, two_point):
        weakened = with_isometry(two_point, IsometryFlag.NO)
        assert with_isometry(weakened, IsometryFlag.ON_TRACELESS).isometric == IsometryFlag.ON_TRACELESS
        with pytest.raises(ContractError):
            with_isometry(weakened, IsometryFlag.ON_ALL)

    def test_with_isometry_refuses_an_unsupported_flag(self, sigma1_triple):
        with pytest.raises(ContractError):
            with_isometry(sigma1_triple, IsometryFlag.ON_ALL)

    def test_invariance_defect(self, d4, sigma1_triple):
        assert seminorm_invariance_defect(d4) <= 1e-9
        assert seminorm_invariance_defect(sigma1_triple) > 0.1

    @pytest.mark.parametrize("signs", SIGN_PATTERNS)
    @pytest.mark.parametrize("perm", PAULI_PERMUTATIONS)
    def test_all_d4_variants(self, signs, perm, rng):
        t = dirac_d4(signs, perm)
        for _ in range(50):
            e = random_traceless_hermitian(2, rng)
            assert lipschitz_seminorm(t, e) == pytest.approx(operator_norm(e), abs=1e-9)


class TestD4n:
    def test_one_level_is_d4(self, d4):
        np.testing.assert_allclose(dirac_d4n([D4Level()]).dirac.matrix, d4.dirac.matrix, atol=1e-15)

    def test_d16(self, rng):
        """D_16 = 1/4 sum sigma_i (x) sigma_i (x) sigma_i (x) sigma_i."""
        t = dirac_d4n([D4Level(), D4Level()])
        assert t.label == "d16"
        expected = sum(kron(*[pauli(i)] * 4) for i in (1, 2, 3)) / 4
        np.testing.assert_allclose(t.dirac.matrix, expected, atol=1e-15)
        for _ in range(50):
            e = random_traceless_hermitian(2, rng)
            assert lipschitz_seminorm(t, e) == pytest.approx(operator_norm(e), abs=1e-9)

    @settings(max_examples=10, deadline=None)
    @given(seed=SEEDS, n=st.integers(min_value=2, max_value=3))
    def test_mixed_levels(self, seed, n):
        rng = np.random.default_rng(seed)
        levels = [
            D4Level(
                left=PAULI_PERMUTATIONS[rng.integers(6)],
                right=PAULI_PERMUTATIONS[rng.integers(6)],
                signs=SIGN_PATTERNS[rng.integers(8)],
            )
            for _ in range(n)
        ]
        t = dirac_d4n(levels)
        assert t.hilbert_dim == 4**n
        for _ in range(10):
            e = random_traceless_hermitian(2, rng)
            assert lipschitz_seminorm(t, e) == pytest.approx(operator_norm(e), abs=1e-9)

    def test_level_limits(self):
        with pytest.raises(CapacityError):
            dirac_d4n([D4Level()] * 4)
        with pytest.raises(ArgumentError):
            dirac_d4n([])

    def test_level_validation(self):
        with pytest.raises(ArgumentError):
            D4Level(left=(1, 1, 2))
        with pytest.raises(ArgumentError):
            D4Level(signs=(1, 0, 1))


class TestTensorInsert:
    def test_d8(self):
        """D_8 carries the term 1/4 sigma_2 (x) M~ (x) sigma_1."""
        M = np.diag([2.0, -1.0])
        t = dirac_tensor_insert(dirac_d4(perm=(3, 1, 2)), M)
        assert t.hilbert_dim == 8
        expected = (
            kron(pauli(1), M / 2, pauli(3)) + kron(pauli(2), M / 2, pauli(1)) + kron(pauli(3), M / 2, pauli(2))
        ) / 4
        np.testing.assert_allclose(t.dirac.raw, expected, atol=1e-15)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_seminorm_preserved(self, m, rng):
        base = dirac_d4(perm=(2, 3, 1))
        for _ in range(5):
            M = random_hermitian(m, rng)
            t = dirac_tensor_insert(base, M)
            for _ in range(50):
                e = random_hermitian(2, rng)
                assert lipschitz_seminorm(t, e) == pytest.approx(lipschitz_seminorm(base, e), abs=1e-9)

    def test_scale_of_m_is_irrelevant(self, d4, rng):
        M = random_hermitian(2, rng)
        np.testing.assert_array_equal(
            dirac_tensor_insert(d4, M).dirac.matrix, dirac_tensor_insert(d4, 2 * M).dirac.matrix
        )

    def test_nests(self, d4):
        t = dirac_tensor_insert(dirac_tensor_insert(d4, pauli(3)), pauli(1))
        assert t.hilbert_dim == 16
        assert lipschitz_seminorm(t, pauli(2)) == pytest.approx(1.0)

    def test_rejections(self, d4, corner3, sigma1_triple):
        with pytest.raises(ArgumentError):
            dirac_tensor_insert(d4, np.zeros((2, 2)))
        with pytest.raises(ArgumentError):
            dirac_tensor_insert(corner3, pauli(1))
        with pytest.raises(ArgumentError):
            dirac_tensor_insert(sigma1_triple, pauli(1))


class TestUnitaries:
    def test_cycles(self):
        u_plus, u_minus = permutation_unitaries()
        np.testing.assert_allclose(u_plus @ pauli(1) @ u_plus.conj().T, pauli(2), atol=1e-12)
        np.testing.assert_allclose(u_plus @ pauli(2) @ u_plus.conj().T, pauli(3), atol=1e-12)
        np.testing.assert_allclose(u_minus @ pauli(3) @ u_minus.conj().T, pauli(2), atol=1e-12)
        np.testing.assert_allclose(u_plus.conj().T @ u_plus, np.eye(2), atol=1e-12)

    def test_bell_basis_diagonalizes(self):
        U = pauli_permutation_unitary()
        for i in (1, 2, 3):
            image = U @ np.kron(pauli(i), pauli(i)) @ U.conj().T
            np.testing.assert_allclose(image - np.diag(np.diag(image)), 0, atol=1e-12)


class TestTransforms:
    def test_conjugate_transports_seminorm(self, d4, sigma1_triple, rng):
        for t in (d4, sigma1_triple):
            U = random_unitary(2, rng)
            moved = conjugate_dirac(t, U)
            for _ in range(10):
                e = random_hermitian(2, rng)
                assert lipschitz_seminorm(moved, U @ e @ U.conj().T) == pytest.approx(
                    lipschitz_seminorm(t, e), abs=1e-10
                )

    def test_conjugate_keeps_terms_consistent(self, d4, rng):
        moved = conjugate_dirac(d4, random_unitary(2, rng))
        rebuilt = sum(np.kron(s, tt) for s, tt in moved.terms)
        np.testing.assert_allclose(rebuilt, moved.dirac.raw, atol=1e-12)

    def test_conjugate_rejections(self, d4, corner3):
        with pytest.raises(ContractError):
            conjugate_dirac(corner3, np.eye(3))
        with pytest.raises(ArgumentError):
            conjugate_dirac(d4, 2 * np.eye(2))

    def test_conjugate_drops_flag_under_mask(self, two_point):
        assert conjugate_dirac(two_point, random_unitary(2, 3)).isometric == IsometryFlag.NO

    def test_shift_leaves_seminorm(self, d4, rng):
        shifted = shift_dirac(d4, 3.5)
        assert shifted.dirac.shift == pytest.approx(d4.dirac.shift + 3.5)
        e = random_hermitian(2, rng)
        assert lipschitz_seminorm(shifted, e) == pytest.approx(lipschitz_seminorm(d4, e), abs=1e-12)

    @pytest.mark.parametrize("lam, flag", [(0.5, IsometryFlag.NO), (-1.0, IsometryFlag.ON_TRACELESS)])
    def test_scale(self, d4, rng, lam, flag):
        scaled = scale_dirac(d4, lam)
        assert scaled.isometric == flag
        e = random_hermitian(2, rng)
        assert lipschitz_seminorm(scaled, e) == pytest.approx(abs(lam) * lipschitz_seminorm(d4, e), abs=1e-12)

    def test_scale_by_zero(self, d4):
        with pytest.raises(ArgumentError):
            scale_dirac(d4, 0.0)
