"""
Connes spectral distance

    d(rho_1, rho_2) = sup { tr((rho_1 - rho_2) e) : ||[D, pi(e)]||_op <= 1 }.

Three paths compute it:

* closed form, when the triple is isometric on the span of the state
  difference: d is the trace distance and the signed spectral projector of
  rho_1 - rho_2 is an optimal element;
* bisection on the scale-invariant ratio tr(delta e) / L(e) over the search
  space V, with a batched projected supergradient ascent deciding each trial
  value;
* a brute-force oracle over a sphere grid, for qubit algebras only, used as
  independent ground truth.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import null_space
from scipy.optimize import minimize, minimize_scalar

from spectral_metric.errors import ArgumentError, CapacityError, ConvergenceError
from spectral_metric.matcore import ComplexMatrix, as_hermitian, hs_norm, trace_norm
from spectral_metric.settings import TOL, SolverOptions
from spectral_metric.states import (
    DensityMatrix,
    optimal_element_tracenorm,
    state_difference,
)
from spectral_metric.triple import (
    IsometryFlag,
    SpectralTriple,
    distance_is_finite,
    lipschitz_seminorm,
    realify,
)

MAX_DOUBLINGS = 60
ORACLE_MAX_ALGEBRA_DIM = 2
ORACLE_MAX_SPACE_DIM = 3
ORACLE_REFINE_ROUNDS = 4


class Method(str, Enum):
    CLOSED_FORM = "closed_form"
    BISECTION = "bisection"
    ORACLE = "oracle"


@dataclass
class SolverResult:
    distance: float
    method: Method
    optimal_element: Optional[ComplexMatrix] = None
    seminorm_certificate: Optional[float] = None
    objective_certificate: Optional[float] = None
    bisection_steps: int = 0
    inner_iterations: int = 0
    bracket: Optional[tuple[float, float]] = None

    @property
    def finite(self) -> bool:
        return math.isfinite(self.distance)

    def __str__(self):
        value = f"{self.distance:.9g}" if self.finite else "inf"
        return f"d={value} via {self.method.value} ({self.bisection_steps} bisection steps)"


@dataclass(frozen=True)
class SearchSpace:
    """
    Real coordinates on V for a given triple.

    ``basis`` holds HS-orthonormal Hermitian elements B_j spanning V and
    ``images`` the commutators A_j = [D, pi(B_j)], so that for e = sum x_j B_j
    the seminorm is L(e) = ||sum x_j A_j||_op.
    """

    basis: NDArray[np.complex128]
    images: NDArray[np.complex128]

    def __len__(self) -> int:
        return len(self.basis)

    def element(self, x: ArrayLike) -> ComplexMatrix:
        e = np.tensordot(np.asarray(x, dtype=float), self.basis, axes=1)
        return (e + e.conj().T) / 2

    def objective(self, delta: ComplexMatrix) -> NDArray[np.float64]:
        """c_j = tr(delta B_j)."""
        return np.real(np.einsum("ij,kji->k", delta, self.basis))

    def seminorms(self, X: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.linalg.norm(np.tensordot(X, self.images, axes=1), 2, axis=(1, 2))

    def seminorms_and_supergradients(
        self, X: NDArray[np.float64], degeneracy: float
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """
        L at each row of X, and a supergradient of L there.

        The supergradient is Re <W, A_j> with W the average of u_i v_i^dag over
        the singular pairs within ``degeneracy`` of the largest one.
        """
        M = np.tensordot(X, self.images, axes=1)
        u, s, vh = np.linalg.svd(M)
        top = s[:, :1]
        block = s >= top * (1 - degeneracy)
        weights = block / block.sum(axis=1, keepdims=True)
        W = np.einsum("bik,bk,bkj->bij", u, weights, vh)
        grads = np.real(np.einsum("bij,kij->bk", W.conj(), self.images))
        return s[:, 0], grads


def search_space(t: SpectralTriple) -> SearchSpace:
    """
    V = Hermitian directions HS-orthogonal to the seminorm kernel.

    Under a unital representation the identity is removed as well, leaving
    traceless elements only.
    """
    directions = t.directions
    images = t.commutator_images
    excluded = null_space(realify(images), rcond=TOL.kernel_cut)
    if t.rep.unital:
        n = t.algebra_dim
        identity = np.real(np.einsum("kij,ji->k", directions, np.eye(n))) / np.sqrt(n)
        excluded = np.column_stack([excluded, identity])
    if excluded.shape[1] == 0:
        coords = np.eye(len(directions))
    else:
        coords = null_space(excluded.T, rcond=TOL.kernel_cut)
    basis = np.tensordot(coords.T, directions, axes=1)
    logger.debug(f"search space of {t.label}: dim {coords.shape[1]} of {len(directions)}")
    return SearchSpace(basis=basis, images=np.tensordot(coords.T, images, axes=1))


def _ratio(space: SearchSpace, c: NDArray[np.float64], X: NDArray[np.float64]) -> NDArray[np.float64]:
    L = space.seminorms(X)
    values = X @ c
    return np.divide(values, L, out=np.full_like(values, -np.inf), where=L > 0)


@dataclass
class _Bisection:
    space: SearchSpace
    c: NDArray[np.float64]
    opts: SolverOptions
    rng: np.random.Generator
    witness: NDArray[np.float64] = field(init=False)
    low: float = field(init=False)
    inner_iterations: int = 0

    def __post_init__(self):
        self.witness = self.c / np.linalg.norm(self.c)
        self.low = float(_ratio(self.space, self.c, self.witness[None, :])[0])

    def _starts(self) -> NDArray[np.float64]:
        X = self.rng.standard_normal((self.opts.restarts, len(self.space)))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        X[0] = self.witness
        return X

    def exceeds(self, s: float) -> bool:
        """Search for x with tr(delta e) / L(e) >= s; on success the witness moves there."""
        opts, c = self.opts, self.c
        X = self._starts()
        ratios = _ratio(self.space, c, X)
        best = int(np.argmax(ratios))
        best_ratio, best_x = float(ratios[best]), X[best].copy()
        stale = 0
        for k in range(1, opts.inner_iters + 1):
            self.inner_iterations += 1
            L, g = self.space.seminorms_and_supergradients(X, opts.degeneracy)
            values = X @ c
            ratios = np.divide(values, L, out=np.full_like(values, -np.inf), where=L > 0)
            i = int(np.argmax(ratios))
            if ratios[i] > best_ratio + 1e-15 * max(1.0, abs(best_ratio)):
                best_ratio, best_x, stale = float(ratios[i]), X[i].copy(), 0
            else:
                stale += 1
            if best_ratio >= s or stale >= opts.patience:
                break
            # ascent on phi_s(x) = c.x - s L(x), then back into the unit ball
            step = c[None, :] - s * g
            norms = np.linalg.norm(step, axis=1, keepdims=True)
            X = X + step / np.where(norms > 0, norms, 1.0) / np.sqrt(k)
            radius = np.linalg.norm(X, axis=1, keepdims=True)
            X = X / np.maximum(radius, 1.0)

        if best_ratio > self.low:
            self.low, self.witness = best_ratio, best_x / np.linalg.norm(best_x)
        return best_ratio >= s

    def polish(self) -> None:
        def negative_ratio(x: NDArray[np.float64]) -> float:
            return -float(_ratio(self.space, self.c, x[None, :])[0])

        k = len(self.space)
        found = minimize(
            negative_ratio,
            self.witness,
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 400 * k},
        )
        if -found.fun > self.low:
            logger.debug(f"polish raised the witness ratio by {-found.fun - self.low:.3e}")
            self.low, self.witness = float(-found.fun), found.x / np.linalg.norm(found.x)


def _bisection_distance(t: SpectralTriple, delta: ComplexMatrix, opts: SolverOptions) -> SolverResult:
    space = search_space(t)
    c = space.objective(delta)
    if len(space) == 0 or np.linalg.norm(c) <= TOL.coincident_states:
        # every feasible direction is blind to delta
        return SolverResult(distance=0.0, method=Method.BISECTION, bracket=(0.0, 0.0))

    search = _Bisection(space, c, opts, np.random.default_rng(opts.seed))
    high = 2 * search.low
    for _ in range(MAX_DOUBLINGS):
        if not search.exceeds(high):
            break
        high = 2 * max(high, search.low)
    else:
        logger.error(f"no upper bracket after {MAX_DOUBLINGS} doublings")
        raise ConvergenceError(
            "could not bracket the distance from above",
            bracket=(search.low, math.inf),
            witness=space.element(search.witness),
        )

    steps = 0
    while high - search.low > opts.tol and steps < opts.max_bisection:
        steps += 1
        mid = (search.low + high) / 2
        if not search.exceeds(mid):
            high = mid
        logger.debug(f"bisection step {steps}: [{search.low:.12g}, {high:.12g}]")

    if opts.polish:
        search.polish()
        if search.low > high:
            logger.warning(f"witness ratio {search.low:.12g} beats the upper bracket {high:.12g}")
            high = search.low

    if high - search.low > opts.tol:
        logger.error(f"bracket [{search.low:.9g}, {high:.9g}] wider than tol={opts.tol:g}")
        raise ConvergenceError(
            f"bisection did not close the bracket within {opts.max_bisection} steps",
            bracket=(search.low, high),
            witness=space.element(search.witness),
        )

    x = search.witness / space.seminorms(search.witness[None, :])[0]
    e = space.element(x)
    return SolverResult(
        distance=search.low,
        method=Method.BISECTION,
        optimal_element=e,
        seminorm_certificate=lipschitz_seminorm(t, e),
        objective_certificate=float(np.real(np.trace(delta @ e))),
        bisection_steps=steps,
        inner_iterations=search.inner_iterations,
        bracket=(search.low, high),
    )


def _in_allowed_span(t: SpectralTriple, e: ComplexMatrix) -> bool:
    if t.allowed is None:
        return True
    coords = np.real(np.einsum("kij,ji->k", t.directions, e))
    residual = e - np.tensordot(coords, t.directions, axes=1)
    return hs_norm(residual) <= TOL.isometry


def _closed_form_applies(t: SpectralTriple, e_o: ComplexMatrix) -> bool:
    """Whether L(e_o) = ||e_o||_op is known, making the trace-norm optimum feasible and optimal."""
    if t.isometric == IsometryFlag.NO or not _in_allowed_span(t, e_o):
        return False
    if t.isometric == IsometryFlag.ON_ALL:
        return True
    # on traceless elements only: fine when e_o is traceless and shifts by I are free
    return t.rep.unital and abs(np.trace(e_o)) <= TOL.isometry


def distance_from_difference(
    t: SpectralTriple, delta: ArrayLike, opts: Optional[SolverOptions] = None
) -> SolverResult:
    """The distance as a function of delta = rho_1 - rho_2 alone."""
    opts = opts or SolverOptions()
    d = as_hermitian(delta)
    if d.shape[0] != t.algebra_dim:
        raise ArgumentError(f"state dimension {d.shape[0]} does not match algebra dimension {t.algebra_dim}")

    if np.max(np.abs(d)) <= TOL.coincident_states:
        return SolverResult(distance=0.0, method=Method.CLOSED_FORM)

    if not distance_is_finite(t, d):
        logger.info(f"{t.label}: seminorm kernel sees delta, distance is infinite")
        return SolverResult(distance=math.inf, method=Method.CLOSED_FORM)

    if not opts.force_bisection:
        e_o = optimal_element_tracenorm(d)
        if _closed_form_applies(t, e_o):
            value = trace_norm(d)
            return SolverResult(
                distance=value,
                method=Method.CLOSED_FORM,
                optimal_element=e_o,
                seminorm_certificate=lipschitz_seminorm(t, e_o),
                objective_certificate=float(np.real(np.trace(d @ e_o))),
            )

    return _bisection_distance(t, d, opts)


def connes_distance(
    t: SpectralTriple,
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    opts: Optional[SolverOptions] = None,
) -> SolverResult:
    if rho1.dim != t.algebra_dim:
        raise ArgumentError(f"state dimension {rho1.dim} does not match algebra dimension {t.algebra_dim}")
    result = distance_from_difference(t, state_difference(rho1, rho2), opts)
    logger.info(f"{t.label}: {result}")
    return result


def _fibonacci_sphere(count: int) -> NDArray[np.float64]:
    i = np.arange(count) + 0.5
    polar = np.arccos(1 - 2 * i / count)
    azimuth = np.pi * (1 + np.sqrt(5)) * i
    return np.column_stack(
        [np.cos(azimuth) * np.sin(polar), np.sin(azimuth) * np.sin(polar), np.cos(polar)]
    )


def _grid(dim: int, count: int) -> NDArray[np.float64]:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        angles = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])
    return _fibonacci_sphere(count)


def _tangents(x: NDArray[np.float64]) -> NDArray[np.float64]:
    """Orthonormal basis of the plane orthogonal to the unit vector x."""
    return null_space(x[None, :]).T


def oracle_distance(
    t: SpectralTriple, rho1: DensityMatrix, rho2: DensityMatrix, grid: int = 20_000
) -> float:
    """
    Brute-force lower bound on the distance for qubit algebras.

    Evaluates the ratio on ``grid`` directions of the reduced search space,
    then refines the best one with bounded scalar searches along the
    tangent great circles and a final Nelder-Mead pass.
    """
    if t.algebra_dim > ORACLE_MAX_ALGEBRA_DIM:
        raise CapacityError(f"the oracle handles algebra dimension <= 2, got {t.algebra_dim}")
    if grid < 1:
        raise ArgumentError(f"grid must be positive, got {grid}")
    space = search_space(t)
    if len(space) > ORACLE_MAX_SPACE_DIM:
        raise CapacityError(
            f"the oracle searches at most {ORACLE_MAX_SPACE_DIM} real dimensions, {t.label} needs {len(space)}"
        )
    delta = state_difference(rho1, rho2)
    if np.max(np.abs(delta)) <= TOL.coincident_states:
        return 0.0

    c = space.objective(delta)
    k = len(space)
    if k == 0 or np.linalg.norm(c) <= TOL.coincident_states:
        return 0.0

    points = _grid(k, grid)
    ratios = _ratio(space, c, points)
    best = int(np.argmax(ratios))
    x, value = points[best], float(ratios[best])
    if k == 1:
        return value

    def ratio_at(y: NDArray[np.float64]) -> float:
        return float(_ratio(space, c, y[None, :])[0])

    width = 2 * np.sqrt(4 * np.pi / grid) if k == 3 else 2 * np.pi / grid
    for _ in range(ORACLE_REFINE_ROUNDS):
        for tangent in _tangents(x):
            found = minimize_scalar(
                lambda a, x0=x, tg=tangent: -ratio_at(np.cos(a) * x0 + np.sin(a) * tg),
                bounds=(-width, width),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if -found.fun > value:
                x = np.cos(found.x) * x + np.sin(found.x) * tangent
                x /= np.linalg.norm(x)
                value = float(-found.fun)
        width /= 4

    polished = minimize(lambda y: -ratio_at(y), x, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15})
    value = max(value, float(-polished.fun))
    logger.debug(f"oracle on {t.label}: {value:.12g} from {grid} grid points")
    return value


@dataclass(frozen=True)
class OptimalityReport:
    seminorm: float
    objective: float
    distance: float
    tol: float

    @property
    def passed(self) -> bool:
        return abs(self.seminorm - 1.0) <= self.tol and abs(self.objective - self.distance) <= self.tol


def verify_optimal(
    t: SpectralTriple,
    delta: ArrayLike,
    e: ArrayLike,
    tol: float = 1e-6,
    distance: Optional[float] = None,
    opts: Optional[SolverOptions] = None,
) -> OptimalityReport:
    """
    Check e against the optimality contract L(e) = 1 and tr(delta e) = d.

    ``distance`` defaults to the solver's value for ``delta``.
    """
    d = as_hermitian(delta)
    m = as_hermitian(e)
    if distance is None:
        distance = distance_from_difference(t, d, opts).distance
    return OptimalityReport(
        seminorm=lipschitz_seminorm(t, m),
        objective=float(np.real(np.trace(d @ m))),
        distance=distance,
        tol=tol,
    )
