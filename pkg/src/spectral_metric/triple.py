"""
Finite spectral triples (A, H, D) with A = M_n(C).

A triple bundles a linear representation pi of the algebra on H = C^N, a
Hermitian Dirac operator on H and the kernel of the Lipschitz seminorm
L(e) = ||[D, pi(e)]||_op, computed once at construction.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from itertools import permutations, product
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import null_space

from spectral_metric.errors import ArgumentError, CapacityError, ContractError
from spectral_metric.matcore import (
    ComplexMatrix,
    HermitianBasis,
    Seed,
    as_hermitian,
    as_matrix,
    commutator,
    is_unitary,
    kron,
    operator_norm,
    pauli,
    random_complex,
    random_hermitian,
    random_unitary,
    traceless_part,
)
from spectral_metric.settings import TOL

MAX_D4N_LEVELS = 3
SIGN_PATTERNS = tuple(product((1, -1), repeat=3))
PAULI_PERMUTATIONS = tuple(permutations((1, 2, 3)))


class RepresentationKind(str, Enum):
    IDENTITY = "identity"
    DIAGONAL = "diagonal"
    CORNER = "corner"
    CUSTOM = "custom"


class IsometryFlag(str, Enum):
    """Where L(e) = ||e||_op is known to hold."""

    ON_ALL = "on_all"
    ON_TRACELESS = "on_traceless"
    NO = "no"


class BallClass(str, Enum):
    OUTSIDE = "outside"
    INTERIOR = "interior"
    BOUNDARY = "boundary"


@dataclass(frozen=True, eq=False)
class Representation:
    """
    Linear map pi: M_n(C) -> M_N(C).

    identity: pi(a) = a; diagonal: pi(a) = I_m (x) a; corner: pi(a) = [[a, 0], [0, 0]];
    custom: images of the Gell-Mann basis elements, extended complex-linearly.
    """

    kind: RepresentationKind
    algebra_dim: int
    hilbert_dim: int
    copies: int = 1
    basis_images: Optional[NDArray[np.complex128]] = None

    @classmethod
    def identity(cls, n: int) -> "Representation":
        return cls(RepresentationKind.IDENTITY, n, n)

    @classmethod
    def diagonal(cls, n: int, copies: int) -> "Representation":
        if copies < 1:
            raise ArgumentError(f"copies must be >= 1, got {copies}")
        return cls(RepresentationKind.DIAGONAL, n, copies * n, copies=copies)

    @classmethod
    def corner(cls, n: int) -> "Representation":
        return cls(RepresentationKind.CORNER, n, 2 * n)

    @classmethod
    def custom(cls, n: int, basis_images: ArrayLike) -> "Representation":
        images = np.asarray(basis_images, dtype=complex)
        if images.ndim != 3 or images.shape[0] != n * n or images.shape[1] != images.shape[2]:
            raise ArgumentError(
                f"custom representation needs {n * n} square images, got shape {images.shape}"
            )
        if not np.all(np.isfinite(images)):
            raise ArgumentError("custom representation has non-finite entries")
        return cls(RepresentationKind.CUSTOM, n, images.shape[1], basis_images=images)

    def __repr__(self) -> str:
        return f"Representation({self.kind.value}, n={self.algebra_dim}, N={self.hilbert_dim})"

    def __call__(self, a: ComplexMatrix) -> ComplexMatrix:
        n, N = self.algebra_dim, self.hilbert_dim
        if a.shape != (n, n):
            raise ArgumentError(f"element must be {n}x{n}, got {a.shape}")
        if self.kind == RepresentationKind.IDENTITY:
            return np.array(a, dtype=complex)
        if self.kind == RepresentationKind.DIAGONAL:
            return np.kron(np.eye(self.copies), a)
        if self.kind == RepresentationKind.CORNER:
            out = np.zeros((N, N), dtype=complex)
            out[:n, :n] = a
            return out
        # custom: split into Hermitian parts, pi(a) = pi(h1) + i pi(h2)
        basis = _basis(n)
        h1 = (a + a.conj().T) / 2
        h2 = (a - a.conj().T) / 2j
        c = basis.coefficients(h1) + 1j * basis.coefficients(h2)
        return np.tensordot(c, self.basis_images, axes=1)

    @cached_property
    def unital(self) -> bool:
        n = self.algebra_dim
        image = self(np.eye(n, dtype=complex))
        return bool(np.max(np.abs(image - np.eye(self.hilbert_dim))) <= TOL.construction)


@dataclass(frozen=True, eq=False)
class DiracOperator:
    """
    Hermitian Dirac operator, stored traceless.

    ``shift`` is the multiple of the identity removed at construction, so the
    operator as given is ``matrix + shift * I``.
    """

    matrix: ComplexMatrix
    tag: str = "matrix"
    shift: float = 0.0

    @classmethod
    def from_matrix(cls, D: ArrayLike, tag: str = "matrix") -> "DiracOperator":
        h = as_hermitian(D)
        shift = float(np.real(np.trace(h))) / h.shape[0]
        return cls(matrix=h - shift * np.eye(h.shape[0]), tag=tag, shift=shift)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def raw(self) -> ComplexMatrix:
        return self.matrix + self.shift * np.eye(self.dim)


# A Dirac operator written as sum_i S_i (x) T_i; T_i acts on the factor the algebra lives on.
DiracTerms = tuple[tuple[ComplexMatrix, ComplexMatrix], ...]


@dataclass(frozen=True, eq=False)
class SpectralTriple:
    rep: Representation
    dirac: DiracOperator
    isometric: IsometryFlag = IsometryFlag.NO
    allowed: Optional[tuple[int, ...]] = None
    terms: Optional[DiracTerms] = None
    label: str = "custom"
    kernel_basis: tuple[ComplexMatrix, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.rep.hilbert_dim != self.dirac.dim:
            raise ArgumentError(
                f"Hilbert dimension {self.rep.hilbert_dim} does not match "
                f"Dirac dimension {self.dirac.dim}"
            )
        if self.allowed is not None:
            n2 = self.algebra_dim**2
            if not self.allowed or any(not 0 <= k < n2 for k in self.allowed):
                raise ArgumentError(f"subalgebra mask must index 0..{n2 - 1}, got {self.allowed}")
        object.__setattr__(self, "kernel_basis", tuple(_kernel(self)))
        logger.debug(f"built {self.label} triple, kernel dim {len(self.kernel_basis)}")

    def __repr__(self) -> str:
        return (
            f"SpectralTriple({self.label}, n={self.algebra_dim}, N={self.hilbert_dim}, "
            f"isometric={self.isometric.value})"
        )

    @property
    def algebra_dim(self) -> int:
        return self.rep.algebra_dim

    @property
    def hilbert_dim(self) -> int:
        return self.rep.hilbert_dim

    @cached_property
    def directions(self) -> NDArray[np.complex128]:
        """HS-orthonormal Hermitian directions the algebra elements may use."""
        basis = _basis(self.algebra_dim)
        idx = range(len(basis)) if self.allowed is None else self.allowed
        return np.array([basis.elements[k] / np.sqrt(basis.norms_squared[k]) for k in idx])

    @cached_property
    def commutator_images(self) -> NDArray[np.complex128]:
        """[D, pi(B)] for every direction B, stacked."""
        D = self.dirac.matrix
        return np.array([commutator(D, self.rep(b)) for b in self.directions])


_BASES: dict[int, HermitianBasis] = {}


def _basis(n: int) -> HermitianBasis:
    if n not in _BASES:
        _BASES[n] = HermitianBasis.gell_mann(n)
    return _BASES[n]


def realify(images: NDArray[np.complex128]) -> NDArray[np.float64]:
    """Columns are the real and imaginary parts of each flattened image."""
    flat = images.reshape(len(images), -1)
    return np.concatenate([flat.real, flat.imag], axis=1).T


def _kernel(t: SpectralTriple) -> list[ComplexMatrix]:
    coords = null_space(realify(t.commutator_images), rcond=TOL.kernel_cut)
    kernel = [np.tensordot(v, t.directions, axes=1) for v in coords.T]
    return [(k + k.conj().T) / 2 for k in kernel]


def _check_element(t: SpectralTriple, e: ArrayLike) -> ComplexMatrix:
    m = as_matrix(e)
    n = t.algebra_dim
    if m.shape != (n, n):
        raise ArgumentError(f"element must be {n}x{n}, got {m.shape}")
    return m


def lipschitz_seminorm(t: SpectralTriple, e: ArrayLike) -> float:
    """L(e) = ||[D, pi(e)]||_op."""
    m = _check_element(t, e)
    return operator_norm(commutator(t.dirac.matrix, t.rep(m)))


def commutator_square(t: SpectralTriple, e: ArrayLike) -> ComplexMatrix:
    m = _check_element(t, e)
    c = commutator(t.dirac.matrix, t.rep(m))
    return c.conj().T @ c


def seminorm_kernel(t: SpectralTriple) -> list[ComplexMatrix]:
    return list(t.kernel_basis)


def distance_is_finite(t: SpectralTriple, delta: ArrayLike) -> bool:
    """
    False when some kernel element k has |tr(delta k)| > 1e-9.

    Such a k satisfies L(k) = 0, so lambda*k lies in the ball for every real
    lambda and the objective tr(delta lambda k) is unbounded.
    """
    d = _check_element(t, delta)
    for k in t.kernel_basis:
        if t.rep.unital:
            k = traceless_part(k)
        if abs(np.trace(d @ k)) > TOL.finiteness:
            return False
    return True


def ball_class(t: SpectralTriple, e: ArrayLike, tol: float = TOL.isometry) -> BallClass:
    """Place e relative to the ball B = {L <= 1} and its unit sphere B_1."""
    value = lipschitz_seminorm(t, e)
    if abs(value - 1.0) <= tol:
        return BallClass.BOUNDARY
    return BallClass.INTERIOR if value < 1.0 else BallClass.OUTSIDE


def _random_direction(t: SpectralTriple, rng: np.random.Generator, traceless: bool) -> ComplexMatrix:
    n = t.algebra_dim
    if t.allowed is None:
        e = random_hermitian(n, rng)
    else:
        e = np.tensordot(rng.standard_normal(len(t.directions)), t.directions, axes=1)
    return traceless_part(e) if traceless else e


def certify_isometry(
    t: SpectralTriple, trials: int = 200, seed: Seed = 0
) -> tuple[IsometryFlag, float]:
    """
    Randomized certification of L(e) = ||e||_op.

    Returns the strongest flag all probes support and the largest deviation
    |L(e) - ||e||_op| / (1 + ||e||_op) seen among the probes of that flag.
    """
    rng = np.random.default_rng(seed)

    def deviation(e: ComplexMatrix) -> float:
        norm = operator_norm(e)
        return abs(lipschitz_seminorm(t, e) - norm) / (1 + norm)

    traceless_dev = max(deviation(_random_direction(t, rng, True)) for _ in range(trials))
    if traceless_dev > TOL.isometry:
        logger.debug(f"isometry probe failed on traceless elements, dev={traceless_dev:.3e}")
        return IsometryFlag.NO, traceless_dev

    probes = [_random_direction(t, rng, False) for _ in range(trials)]
    if t.allowed is None:
        probes += [random_complex(t.algebra_dim, rng) for _ in range(trials)]
    all_dev = max(deviation(e) for e in probes)
    if all_dev <= TOL.isometry:
        return IsometryFlag.ON_ALL, max(all_dev, traceless_dev)
    return IsometryFlag.ON_TRACELESS, traceless_dev


_FLAG_STRENGTH = {IsometryFlag.NO: 0, IsometryFlag.ON_TRACELESS: 1, IsometryFlag.ON_ALL: 2}


def with_isometry(
    t: SpectralTriple, flag: IsometryFlag, trials: int = 200, seed: Seed = 0
) -> SpectralTriple:
    """
    Copy of t carrying flag.

    Weakening is free. A stronger flag than t already carries must pass
    certify_isometry first, otherwise ContractError.
    """
    flag = IsometryFlag(flag)
    if _FLAG_STRENGTH[flag] > _FLAG_STRENGTH[t.isometric]:
        certified, dev = certify_isometry(t, trials, seed)
        if _FLAG_STRENGTH[flag] > _FLAG_STRENGTH[certified]:
            logger.error(f"{t.label}: probes support {certified.value}, not {flag.value} (dev={dev:.3e})")
            raise ContractError(
                f"isometry flag {flag.value!r} is not supported by {t.label}; certified {certified.value!r}"
            )
    return replace(t, isometric=flag)


def seminorm_invariance_defect(t: SpectralTriple, trials: int = 50, seed: Seed = 0) -> float:
    """max |L(U e U^dag) - L(e)| over random unitaries U and Hermitian e."""
    rng = np.random.default_rng(seed)
    n = t.algebra_dim
    worst = 0.0
    for _ in range(trials):
        e = random_hermitian(n, rng)
        U = random_unitary(n, rng)
        worst = max(worst, abs(lipschitz_seminorm(t, U @ e @ U.conj().T) - lipschitz_seminorm(t, e)))
    return worst


def _sigma_pair(left: int, right: int) -> ComplexMatrix:
    return kron(pauli(left), pauli(right))


def _check_signs(signs: Sequence[int]) -> tuple[int, int, int]:
    if len(signs) != 3 or any(s not in (1, -1) for s in signs):
        raise ArgumentError(f"signs must be three values in {{+1, -1}}, got {signs}")
    return tuple(int(s) for s in signs)  # type: ignore[return-value]


def _check_perm(perm: Sequence[int]) -> tuple[int, int, int]:
    if sorted(perm) != [1, 2, 3]:
        raise ArgumentError(f"expected a permutation of (1, 2, 3), got {perm}")
    return tuple(int(p) for p in perm)  # type: ignore[return-value]


def _from_terms(
    terms: DiracTerms,
    rep: Representation,
    isometric: IsometryFlag,
    label: str,
    tag: str,
) -> SpectralTriple:
    D = sum(np.kron(s, tt) for s, tt in terms)
    return SpectralTriple(
        rep=rep,
        dirac=DiracOperator.from_matrix(D, tag=tag),
        isometric=isometric,
        terms=terms,
        label=label,
    )


def dirac_two_point() -> SpectralTriple:
    """Diagonal 2x2 matrices with D = sigma_1 / 2; the diagonal subalgebra is span{I, sigma_3}."""
    return SpectralTriple(
        rep=Representation.identity(2),
        dirac=DiracOperator.from_matrix(pauli(1) / 2, tag="two_point"),
        isometric=IsometryFlag.ON_TRACELESS,
        allowed=(0, 3),
        label="two_point",
    )


def dirac_corner(n: int) -> SpectralTriple:
    """pi(a) = [[a, 0], [0, 0]] and D = [[0, I], [I, 0]], so that L(e) = ||e||_op."""
    if n < 1:
        raise ArgumentError(f"algebra dimension must be >= 1, got {n}")
    return SpectralTriple(
        rep=Representation.corner(n),
        dirac=DiracOperator.from_matrix(np.kron(pauli(1), np.eye(n)), tag=f"corner({n})"),
        isometric=IsometryFlag.ON_ALL,
        label="corner",
    )


def d4_terms(
    signs: Sequence[int] = (1, 1, 1),
    perm: Sequence[int] = (1, 2, 3),
) -> DiracTerms:
    """Terms (s_i sigma_i / 4, sigma_{perm_i}) of D_4' = 1/4 sum_i s_i sigma_i (x) sigma_{perm_i}."""
    signs, perm = _check_signs(signs), _check_perm(perm)
    return tuple((s * pauli(i) / 4, pauli(p)) for i, s, p in zip((1, 2, 3), signs, perm))


def dirac_d4(
    signs: Sequence[int] = (1, 1, 1),
    perm: Sequence[int] = (1, 2, 3),
) -> SpectralTriple:
    terms = d4_terms(signs, perm)
    return _from_terms(
        terms,
        Representation.diagonal(2, copies=2),
        IsometryFlag.ON_TRACELESS,
        label="d4",
        tag=f"d4(signs={tuple(signs)}, perm={tuple(perm)})",
    )


@dataclass(frozen=True)
class D4Level:
    """One tensor level of D_{4^n}: term i carries s_i sigma_{left_i} (x) sigma_{right_i}."""

    left: tuple[int, int, int] = (1, 2, 3)
    right: tuple[int, int, int] = (1, 2, 3)
    signs: tuple[int, int, int] = (1, 1, 1)

    def __post_init__(self):
        object.__setattr__(self, "left", _check_perm(self.left))
        object.__setattr__(self, "right", _check_perm(self.right))
        object.__setattr__(self, "signs", _check_signs(self.signs))

    def factor(self, i: int) -> ComplexMatrix:
        return self.signs[i] * _sigma_pair(self.left[i], self.right[i])


def dirac_d4n(levels: Sequence[D4Level]) -> SpectralTriple:
    """
    D_{4^n} = 1/4 sum_i level_n(i) (x) ... (x) level_1(i), levels listed outermost first.

    The algebra acts as pi_n(e) = I_{4^(n-1)} (x) I_2 (x) e on C^{4^n}.
    """
    n = len(levels)
    if n < 1:
        raise ArgumentError("D_{4^n} needs at least one level")
    if n > MAX_D4N_LEVELS:
        raise CapacityError(f"D_{{4^n}} is capped at n <= {MAX_D4N_LEVELS}, got n = {n}")
    terms = []
    for i in range(3):
        factors = [lvl.factor(i) for lvl in levels]
        # split off the last 2x2 factor, which is where the algebra acts
        last = levels[-1]
        S = kron(*factors[:-1], last.signs[i] * pauli(last.left[i])) / 4
        T = pauli(last.right[i])
        terms.append((S, T))
    return _from_terms(
        tuple(terms),
        Representation.diagonal(2, copies=2 * 4 ** (n - 1)),
        IsometryFlag.ON_TRACELESS,
        label=f"d{4**n}",
        tag=f"d4n({[(lvl.left, lvl.right, lvl.signs) for lvl in levels]})",
    )


def dirac_tensor_insert(base: SpectralTriple, M: ArrayLike) -> SpectralTriple:
    """
    D' = sum_i S_i (x) M~ (x) T_i with M~ = M / ||M||_op, and pi'(a) = I_{mn} (x) a.

    Seminorms, and hence distances, coincide with those of ``base``.
    """
    if base.terms is None:
        raise ArgumentError("tensor insertion needs a Dirac operator given as a term list")
    if base.rep.kind not in (RepresentationKind.DIAGONAL, RepresentationKind.IDENTITY):
        raise ArgumentError(f"tensor insertion needs a diagonal representation, got {base.rep.kind.value}")
    m = as_hermitian(M)
    norm = operator_norm(m)
    if norm == 0.0:
        raise ArgumentError("inserted matrix M must be non-zero")
    m_tilde = m / norm
    terms = tuple((np.kron(s, m_tilde), tt) for s, tt in base.terms)
    n = base.algebra_dim
    copies = base.rep.hilbert_dim // n * m.shape[0]
    return _from_terms(
        terms,
        Representation.diagonal(n, copies=copies),
        base.isometric,
        label=f"{base.label}+insert",
        tag=f"insert({base.dirac.tag}, M{m.shape[0]})",
    )


def permutation_unitaries() -> tuple[ComplexMatrix, ComplexMatrix]:
    """U_+ cycles sigma_1 -> sigma_2 -> sigma_3 -> sigma_1 and U_- runs the cycle backwards."""
    u_plus = np.array([[1 - 1j, -1 - 1j], [1 - 1j, 1 + 1j]]) / 2
    u_minus = np.array([[1 + 1j, 1 + 1j], [-1 + 1j, 1 - 1j]]) / 2
    return u_plus, u_minus


def pauli_permutation_unitary() -> ComplexMatrix:
    """4x4 unitary that simultaneously diagonalizes sigma_i (x) sigma_i, i = 1, 2, 3."""
    return np.array(
        [
            [1, 0, 0, -1],
            [0, 1, -1, 0],
            [0, 1, 1, 0],
            [1, 0, 0, 1],
        ],
        dtype=complex,
    ) / np.sqrt(2)


def conjugate_dirac(t: SpectralTriple, U: ArrayLike) -> SpectralTriple:
    """The triple with D' = pi(U) D pi(U^dag); it has the metric of D transported by U."""
    if not t.rep.unital:
        raise ContractError("conjugating the Dirac operator needs a unital representation")
    u = _check_element(t, U)
    if not is_unitary(u):
        raise ArgumentError("U is not unitary")
    pu = t.rep(u)
    D = pu @ t.dirac.raw @ pu.conj().T
    terms = None
    if t.terms is not None and t.rep.kind == RepresentationKind.DIAGONAL:
        size = t.terms[0][1].shape[0]
        lift = np.kron(np.eye(size // t.algebra_dim), u)
        terms = tuple((s, lift @ tt @ lift.conj().T) for s, tt in t.terms)
    flag = t.isometric if t.allowed is None else IsometryFlag.NO
    return replace(
        t,
        dirac=DiracOperator.from_matrix(D, tag=f"conj({t.dirac.tag})"),
        isometric=flag,
        terms=terms,
        label=f"{t.label}^U",
    )


def shift_dirac(t: SpectralTriple, lam: float) -> SpectralTriple:
    """lambda I + D; the ball condition and metric are unchanged."""
    D = t.dirac.raw + lam * np.eye(t.hilbert_dim)
    return replace(t, dirac=DiracOperator.from_matrix(D, tag=f"shift({lam:g}, {t.dirac.tag})"))


def scale_dirac(t: SpectralTriple, lam: float) -> SpectralTriple:
    """lambda D; distances scale by 1/|lambda|."""
    if lam == 0:
        raise ArgumentError("scaling the Dirac operator by zero makes every distance infinite")
    flag = t.isometric if abs(lam) == 1 else IsometryFlag.NO
    terms = None if t.terms is None else tuple((lam * s, tt) for s, tt in t.terms)
    return replace(
        t,
        dirac=DiracOperator.from_matrix(lam * t.dirac.raw, tag=f"scale({lam:g}, {t.dirac.tag})"),
        isometric=flag,
        terms=terms,
    )


def triple_from_dirac(
    rep: Representation,
    D: ArrayLike,
    allowed: Optional[Sequence[int]] = None,
    label: str = "custom",
) -> SpectralTriple:
    """Triple around an explicit Dirac matrix; no isometry is assumed."""
    return SpectralTriple(
        rep=rep,
        dirac=DiracOperator.from_matrix(D),
        allowed=None if allowed is None else tuple(allowed),
        label=label,
    )
