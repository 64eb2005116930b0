"""
Named, reproducible check bundles for the metric statements the toolkit
implements.

Each suite is a function of (trials, rng, opts) returning per-trial records;
``run_suite`` seeds the generator from (seed, suite name), collects the
records and compares the largest deviation with the suite's tolerance.
"""

import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from spectral_metric.errors import ArgumentError
from spectral_metric.matcore import (
    commutator,
    kron,
    operator_norm,
    pauli,
    pauli_coefficients,
    random_complex,
    random_density,
    random_hermitian,
    random_traceless_hermitian,
    random_unitary,
)
from spectral_metric.settings import SolverOptions
from spectral_metric.solver import connes_distance, oracle_distance, verify_optimal
from spectral_metric.states import (
    DensityMatrix,
    bloch_from_density,
    density_from_bloch,
    expectation,
    optimal_element_tracenorm,
    pure_state,
    state_difference,
    trace_distance,
)
from spectral_metric.triple import (
    PAULI_PERMUTATIONS,
    SIGN_PATTERNS,
    D4Level,
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
    dirac_two_point,
    distance_is_finite,
    lipschitz_seminorm,
    pauli_permutation_unitary,
    permutation_unitaries,
    scale_dirac,
    seminorm_invariance_defect,
    seminorm_kernel,
    shift_dirac,
    triple_from_dirac,
)

EXACT_TOL = 1e-9
SOLVER_TOL_FACTOR = 3


class TrialRecord(BaseModel):
    label: str
    deviation: float
    values: dict[str, Union[float, str]] = {}


class SuiteReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    suite_name: str
    trials: int
    seed: int
    tolerance: float
    max_deviation: float
    passed: bool = Field(alias="pass")
    records: list[TrialRecord] = []

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        return f"{self.suite_name}: {status} (max deviation {self.max_deviation:.3e} <= {self.tolerance:g})"

    def to_json(self, indent: int = 2) -> str:
        return self.model_dump_json(indent=indent, by_alias=True)


def reports_to_json(reports: list[SuiteReport], indent: int = 2) -> str:
    body = ",\n".join(r.to_json(indent=indent) for r in reports)
    return f"[\n{body}\n]"


def reports_to_file(reports: list[SuiteReport], file_path: Path) -> None:
    file_path.write_text(reports_to_json(reports))
    logger.info(f"wrote {len(reports)} suite reports to {file_path}")


SuiteCheck = Callable[[int, np.random.Generator, SolverOptions], list[TrialRecord]]


@dataclass(frozen=True)
class Suite:
    name: str
    statement: str
    check: SuiteCheck
    covers: frozenset[str]
    solver_mediated: bool = False

    def tolerance(self, opts: SolverOptions) -> float:
        return SOLVER_TOL_FACTOR * opts.tol if self.solver_mediated else EXACT_TOL


class SuiteRegistry:
    """Global registry that maintains single instances of suites"""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance.initialized = False
        return cls._instance

    def __init__(self):
        if not self.initialized:
            logger.debug("initializing suite registry")
            self._suites: dict[str, Suite] = {}
            self.initialized = True

    def register(self, suite: Suite) -> None:
        self._suites[suite.name] = suite
        logger.debug(f"Registered suite: {suite.name}")

    def get(self, name: str) -> Suite:
        if name not in self._suites:
            logger.debug(f"registry contains: {self.available_suites}")
            raise ArgumentError(f"Suite {name} not registered")
        return self._suites[name]

    def reset(self) -> None:
        self._suites = {}
        logger.debug("Suite registry has been reset")

    @property
    def available_suites(self) -> list[str]:
        return list(self._suites)


def suite(name: str, statement: str, covers: Iterable[str], solver_mediated: bool = False):
    def wrap(check: SuiteCheck) -> SuiteCheck:
        SuiteRegistry().register(Suite(name, statement, check, frozenset(covers), solver_mediated))
        return check

    return wrap


def suite_rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode()),)))


def run_suite(
    name: str, trials: int = 25, seed: int = 0, opts: Optional[SolverOptions] = None
) -> SuiteReport:
    if trials < 1:
        raise ArgumentError(f"trials must be >= 1, got {trials}")
    opts = opts or SolverOptions()
    entry = SuiteRegistry().get(name)
    records = entry.check(trials, suite_rng(seed, name), opts)
    tolerance = entry.tolerance(opts)
    max_deviation = max((r.deviation for r in records), default=0.0)
    report = SuiteReport(
        suite_name=name,
        trials=trials,
        seed=seed,
        tolerance=tolerance,
        max_deviation=max_deviation,
        passed=max_deviation <= tolerance,
        records=records,
    )
    if report.passed:
        logger.success(str(report))
    else:
        logger.warning(str(report))
    return report


def run_suites(
    names: Iterable[str],
    trials: int = 25,
    seed: int = 0,
    opts: Optional[SolverOptions] = None,
    workers: int = 1,
) -> list[SuiteReport]:
    """Reports in the order of ``names``; suites own their RNG streams, so workers do not change results."""
    names = list(names)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(lambda n: run_suite(n, trials, seed, opts), names))


def covered_operations() -> set[str]:
    registry = SuiteRegistry()
    return set().union(*(registry.get(n).covers for n in registry.available_suites))


def random_triple(rng: np.random.Generator) -> SpectralTriple:
    """Diagonal representation of M_2 on C^4 with a random traceless Hermitian Dirac operator."""
    D = random_traceless_hermitian(4, rng)
    return triple_from_dirac(Representation.diagonal(2, copies=2), D, label="random_d4")


def random_bloch(rng: np.random.Generator, pure: bool = False) -> np.ndarray:
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    radius = 1.0 if pure else rng.random() ** (1 / 3)
    return radius * direction


def _random_qubit_pair(rng: np.random.Generator) -> tuple[DensityMatrix, DensityMatrix]:
    return density_from_bloch(random_bloch(rng)), density_from_bloch(random_bloch(rng))


def _random_d4_variant(rng: np.random.Generator) -> SpectralTriple:
    signs = SIGN_PATTERNS[rng.integers(len(SIGN_PATTERNS))]
    perm = PAULI_PERMUTATIONS[rng.integers(len(PAULI_PERMUTATIONS))]
    return dirac_d4(signs, perm)


def _random_level(rng: np.random.Generator) -> D4Level:
    return D4Level(
        left=PAULI_PERMUTATIONS[rng.integers(6)],
        right=PAULI_PERMUTATIONS[rng.integers(6)],
        signs=SIGN_PATTERNS[rng.integers(8)],
    )


def _isometry_deviation(t: SpectralTriple, e: np.ndarray) -> float:
    return abs(lipschitz_seminorm(t, e) - operator_norm(e))


@suite(
    "lemma-d0",
    "d(rho, rho) = 0, and distinct states sit at least ||delta||_HS^2 / L(delta) apart",
    covers={"connes_distance", "dirac_d4", "dirac_corner", "lipschitz_seminorm"},
    solver_mediated=True,
)
def _lemma_d0(trials, rng, opts):
    records = []
    triples = (dirac_d4(), dirac_corner(3))
    for i in range(trials):
        for t in triples:
            n = t.algebra_dim
            rho1, rho2 = random_density(n, rng), random_density(n, rng)
            delta = state_difference(rho1, rho2)
            d = connes_distance(t, rho1, rho2, opts).distance
            bound = np.linalg.norm(delta) ** 2 / lipschitz_seminorm(t, delta)
            self_distance = connes_distance(t, rho1, rho1, opts).distance
            deviation = max(self_distance, bound - d, 0.0)
            records.append(
                TrialRecord(label=f"{t.label}#{i}", deviation=deviation, values={"distance": d, "bound": bound})
            )
    return records


@suite(
    "lemma-shift",
    "lambda I + D and D give the same seminorm and the same metric",
    covers={"lipschitz_seminorm", "connes_distance", "shift_dirac"},
    solver_mediated=True,
)
def _lemma_shift(trials, rng, opts):
    records = []
    for i in range(trials):
        lam = float(rng.uniform(-5, 5))
        t = random_triple(rng)
        shifted = shift_dirac(t, lam)
        e = random_hermitian(2, rng)
        raw = operator_norm(commutator(shifted.dirac.raw, shifted.rep(e)))
        seminorm_gap = abs(raw - lipschitz_seminorm(t, e))
        rho1, rho2 = _random_qubit_pair(rng)
        result = connes_distance(t, rho1, rho2, opts)
        d_shift = connes_distance(shifted, rho1, rho2, opts).distance
        # the witness of D, measured against the commutator with lambda I + D as given
        e_o = result.optimal_element
        witness_ratio = result.objective_certificate / operator_norm(commutator(shifted.dirac.raw, shifted.rep(e_o)))
        records.append(
            TrialRecord(
                label=f"lambda={lam:.3f}",
                deviation=max(seminorm_gap, abs(result.distance - d_shift), abs(result.distance - witness_ratio)),
                values={
                    "seminorm_gap": seminorm_gap,
                    "distance": result.distance,
                    "shifted": d_shift,
                    "witness_ratio": witness_ratio,
                },
            )
        )
    return records


@suite(
    "lemma-tloe",
    "e_o + lambda I is optimal whenever e_o is, under a unital representation",
    covers={"verify_optimal", "connes_distance", "optimal_element_tracenorm"},
)
def _lemma_tloe(trials, rng, opts):
    records = []
    t = dirac_d4()
    for i in range(trials):
        rho1, rho2 = _random_qubit_pair(rng)
        result = connes_distance(t, rho1, rho2, opts)
        delta = state_difference(rho1, rho2)
        lam = float(rng.uniform(-5, 5))
        base = verify_optimal(t, delta, result.optimal_element, distance=result.distance)
        shifted = verify_optimal(t, delta, result.optimal_element + lam * np.eye(2), distance=result.distance)
        deviation = max(abs(base.seminorm - shifted.seminorm), abs(base.objective - shifted.objective))
        if not shifted.passed:
            deviation = max(deviation, abs(shifted.seminorm - 1), abs(shifted.objective - shifted.distance))
        records.append(
            TrialRecord(
                label=f"pair#{i}",
                deviation=deviation,
                values={"seminorm": shifted.seminorm, "objective": shifted.objective},
            )
        )
    return records


@suite(
    "lemma-scaling",
    "|lambda| d_{lambda D} = d_D",
    covers={"connes_distance", "dirac_d4"},
    solver_mediated=True,
)
def _lemma_scaling(trials, rng, opts):
    records = []
    t = dirac_d4()
    for i in range(trials):
        rho1, rho2 = _random_qubit_pair(rng)
        d = connes_distance(t, rho1, rho2, opts).distance
        for lam in (0.5, 2.0, -3.0):
            scaled = connes_distance(scale_dirac(t, lam), rho1, rho2, opts).distance
            records.append(
                TrialRecord(
                    label=f"pair#{i} lambda={lam:g}",
                    deviation=abs(abs(lam) * scaled - d),
                    values={"distance": d, "scaled": scaled},
                )
            )
    return records


@suite(
    "theorem-Leo1",
    "optimal elements of distinct states lie on the unit sphere L(e_o) = 1",
    covers={"connes_distance", "lipschitz_seminorm"},
    solver_mediated=True,
)
def _theorem_leo1(trials, rng, opts):
    records = []
    d4 = dirac_d4()
    for i in range(trials):
        for t in (d4, random_triple(rng)):
            rho1, rho2 = _random_qubit_pair(rng)
            result = connes_distance(t, rho1, rho2, opts)
            if not result.finite or result.optimal_element is None:
                continue
            records.append(
                TrialRecord(
                    label=f"{t.label}#{i}",
                    deviation=abs(lipschitz_seminorm(t, result.optimal_element) - 1.0),
                    values={"distance": result.distance, "method": result.method.value},
                )
            )
    return records


@suite(
    "lemma-centralizer",
    "a Dirac operator commuting with a non-scalar pi(e) makes distances infinite",
    covers={
        "seminorm_kernel",
        "distance_is_finite",
        "connes_distance",
        "density_from_bloch",
        "lipschitz_seminorm",
    },
)
def _lemma_centralizer(trials, rng, opts):
    t = triple_from_dirac(Representation.identity(2), pauli(1), label="sigma1")
    rho1 = density_from_bloch([0.0, 0.0, 1.0])
    rho2 = pure_state([1.0, 1.0])
    result = connes_distance(t, rho1, rho2, opts)
    delta = state_difference(rho1, rho2)
    kernel_dim = len(seminorm_kernel(t))
    records = [
        TrialRecord(
            label="sigma1 fixture",
            deviation=0.0 if not result.finite and kernel_dim == 2 else 1.0,
            values={"distance": "inf" if not result.finite else result.distance, "kernel_dim": kernel_dim},
        )
    ]
    # k * sigma_1 stays feasible for every k while the objective grows like k
    for k in (1.0, 10.0, 100.0):
        e = k * pauli(1)
        value = abs(expectation(rho1, e) - expectation(rho2, e))
        records.append(
            TrialRecord(
                label=f"k={k:g}",
                deviation=max(lipschitz_seminorm(t, e), abs(value - k)),
                values={"objective": value},
            )
        )
    for i in range(trials):
        n = int(rng.integers(2, 5))
        central = triple_from_dirac(Representation.identity(n), rng.normal() * np.eye(n), label="central")
        a, b = random_density(n, rng), random_density(n, rng)
        finite = distance_is_finite(central, state_difference(a, b))
        records.append(TrialRecord(label=f"central n={n}", deviation=1.0 if finite else 0.0))
    return records


@suite(
    "theorem-lu",
    "on isometric triples the distance is invariant under unitary conjugation of both states",
    covers={"connes_distance", "dirac_d4", "dirac_corner"},
    solver_mediated=True,
)
def _theorem_lu(trials, rng, opts):
    records = []
    for t in (dirac_d4(), dirac_corner(3)):
        n = t.algebra_dim
        defect = seminorm_invariance_defect(t, trials=trials, seed=rng)
        records.append(TrialRecord(label=f"{t.label} seminorm", deviation=defect))
        for i in range(trials):
            rho1, rho2 = random_density(n, rng), random_density(n, rng)
            U = random_unitary(n, rng)
            d = connes_distance(t, rho1, rho2, opts).distance
            d_u = connes_distance(t, rho1.conjugated(U), rho2.conjugated(U), opts).distance
            records.append(TrialRecord(label=f"{t.label}#{i}", deviation=abs(d - d_u), values={"distance": d}))
    return records


@suite(
    "theorem-udu",
    "pi(U) D pi(U^dag) carries the metric of D transported by U",
    covers={"conjugate_dirac", "connes_distance", "lipschitz_seminorm"},
    solver_mediated=True,
)
def _theorem_udu(trials, rng, opts):
    records = []
    t = dirac_d4()
    for i in range(trials):
        U = random_unitary(2, rng)
        conj = conjugate_dirac(t, U)
        rho1, rho2 = _random_qubit_pair(rng)
        d = connes_distance(conj, rho1, rho2, opts).distance
        Ud = U.conj().T
        d_back = connes_distance(t, rho1.conjugated(Ud), rho2.conjugated(Ud), opts).distance
        generic = random_triple(rng)
        e = random_hermitian(2, rng)
        transport = abs(
            lipschitz_seminorm(conjugate_dirac(generic, U), e) - lipschitz_seminorm(generic, Ud @ e @ U)
        )
        records.append(
            TrialRecord(
                label=f"U#{i}",
                deviation=max(abs(d - d_back), transport),
                values={"distance": d, "transported": d_back, "seminorm_gap": transport},
            )
        )
    return records


@suite(
    "theorem-corner",
    "the corner representation with D = [[0, I], [I, 0]] gives L(e) = ||e||_op for every e",
    covers={"dirac_corner", "lipschitz_seminorm"},
)
def _theorem_corner(trials, rng, opts):
    records = []
    for n in (2, 3, 4):
        t = dirac_corner(n)
        flag, dev = certify_isometry(t, trials=trials, seed=rng)
        records.append(
            TrialRecord(label=f"certify n={n}", deviation=dev if flag == IsometryFlag.ON_ALL else 1.0)
        )
        for i in range(trials):
            e = random_complex(n, rng)
            records.append(TrialRecord(label=f"n={n}#{i}", deviation=_isometry_deviation(t, e)))
    return records


@suite(
    "theorem-t6",
    "on the corner triple the distance is the trace distance, attained by the signed spectral projector",
    covers={"connes_distance", "trace_distance", "optimal_element_tracenorm", "dirac_corner"},
)
def _theorem_t6(trials, rng, opts):
    records = []
    for n in (2, 3, 4):
        t = dirac_corner(n)
        for i in range(trials):
            rho1, rho2 = random_density(n, rng), random_density(n, rng)
            delta = state_difference(rho1, rho2)
            result = connes_distance(t, rho1, rho2, opts)
            e_o = optimal_element_tracenorm(delta)
            exact = trace_distance(rho1, rho2)
            witness = float(np.real(np.trace(delta @ e_o)))
            # random contractions never beat the trace norm
            P = random_hermitian(n, rng)
            P /= max(operator_norm(P), 1.0)
            excess = max(abs(np.trace(P @ delta)) - exact, 0.0)
            records.append(
                TrialRecord(
                    label=f"n={n}#{i}",
                    deviation=max(abs(result.distance - exact), abs(witness - exact), excess),
                    values={"distance": result.distance, "trace_distance": exact},
                )
            )
    return records


@suite(
    "example-two-point",
    "the two-point space has d = 2|p - q|",
    covers={"dirac_two_point", "connes_distance", "oracle_distance", "lipschitz_seminorm"},
)
def _example_two_point(trials, rng, opts):
    t = dirac_two_point()
    records = []
    for i in range(trials):
        p, q = rng.random(2)
        rho1 = DensityMatrix(np.diag([p, 1 - p]))
        rho2 = DensityMatrix(np.diag([q, 1 - q]))
        d = connes_distance(t, rho1, rho2, opts).distance
        oracle = oracle_distance(t, rho1, rho2, grid=16)
        a = float(rng.uniform(-2, 2))
        seminorm_gap = abs(lipschitz_seminorm(t, np.diag([a, -a])) - abs(a))
        expected = 2 * abs(p - q)
        records.append(
            TrialRecord(
                label=f"p={p:.3f} q={q:.3f}",
                deviation=max(abs(d - expected), abs(oracle - expected), seminorm_gap),
                values={"distance": d, "oracle": oracle, "expected": expected},
            )
        )
    return records


def _d4_square_law(t: SpectralTriple, e: np.ndarray) -> float:
    r = pauli_coefficients(e)
    r2 = float(r @ r)
    expected = (r2 * np.eye(4) - np.kron(e, e)) / 2
    square = commutator_square(t, e)
    eigenvalues = np.linalg.eigvalsh(square)
    return max(float(np.max(np.abs(square - expected))), float(np.max(np.abs(eigenvalues - [0, 0, r2, r2]))))


@suite(
    "lemma-d4",
    "D_4 = 1/4 sum sigma_i (x) sigma_i gives L(e) = ||e||_op on traceless e",
    covers={"dirac_d4", "lipschitz_seminorm", "seminorm_kernel"},
)
def _lemma_d4(trials, rng, opts):
    t = dirac_d4()
    kernel = seminorm_kernel(t)
    records = [TrialRecord(label="kernel", deviation=0.0 if len(kernel) == 1 else 1.0)]
    for i in range(trials):
        e = random_traceless_hermitian(2, rng)
        records.append(
            TrialRecord(
                label=f"e#{i}",
                deviation=max(_isometry_deviation(t, e), _d4_square_law(t, e)),
            )
        )
    return records


@suite(
    "lemma-d4p",
    "all 48 signed and permuted D_4' variants stay isometric on traceless e",
    covers={"dirac_d4", "permutation_unitaries", "lipschitz_seminorm"},
)
def _lemma_d4p(trials, rng, opts):
    records = []
    u_plus, u_minus = permutation_unitaries()
    cycles = [
        (u_plus, 1, 2),
        (u_plus, 2, 3),
        (u_plus, 3, 1),
        (u_minus, 3, 2),
        (u_minus, 2, 1),
        (u_minus, 1, 3),
    ]
    for U, src, dst in cycles:
        gap = float(np.max(np.abs(U @ pauli(src) @ U.conj().T - pauli(dst))))
        records.append(TrialRecord(label=f"sigma_{src} -> sigma_{dst}", deviation=gap))
    for signs in SIGN_PATTERNS:
        for perm in PAULI_PERMUTATIONS:
            t = dirac_d4(signs, perm)
            worst = max(_isometry_deviation(t, random_traceless_hermitian(2, rng)) for _ in range(trials))
            records.append(TrialRecord(label=f"signs={signs} perm={perm}", deviation=worst))
    return records


def _d16_block_deviation(e: np.ndarray) -> float:
    """(U (x) I_4) [D_16, pi_2(e)] (U^dag (x) I_4) splits into four signed D_4 commutators."""
    U = pauli_permutation_unitary()
    pi1 = np.kron(np.eye(2), e)
    sigma_ii = [kron(pauli(i), pauli(i)) for i in (1, 2, 3)]
    C = sum(np.kron(s, commutator(s, pi1)) for s in sigma_ii) / 4
    lift = np.kron(U, np.eye(4))
    rotated = lift @ C @ lift.conj().T
    diagonals = [np.real(np.diag(U @ s @ U.conj().T)) for s in sigma_ii]
    expected = np.zeros_like(rotated)
    for k in range(4):
        signs = [int(np.sign(diag[k])) for diag in diagonals]
        D4k = sum(sg * s for sg, s in zip(signs, sigma_ii)) / 4
        expected[4 * k : 4 * k + 4, 4 * k : 4 * k + 4] = commutator(D4k, pi1)
    return float(np.max(np.abs(rotated - expected)))


@suite(
    "theorem-d4n",
    "D_{4^n} stays isometric on traceless e for n = 2, 3",
    covers={"dirac_d4n", "lipschitz_seminorm"},
)
def _theorem_d4n(trials, rng, opts):
    d16 = dirac_d4n([D4Level(), D4Level()])
    records = []
    for i in range(trials):
        e = random_traceless_hermitian(2, rng)
        records.append(
            TrialRecord(
                label=f"D16#{i}",
                deviation=max(_isometry_deviation(d16, e), _d16_block_deviation(e)),
            )
        )
        for n in (2, 3):
            t = dirac_d4n([_random_level(rng) for _ in range(n)])
            records.append(TrialRecord(label=f"{t.label}#{i}", deviation=_isometry_deviation(t, e)))
    return records


@suite(
    "lemma-insert",
    "inserting M / ||M||_op as a middle tensor factor keeps every seminorm",
    covers={"dirac_tensor_insert", "dirac_d4", "lipschitz_seminorm"},
)
def _lemma_insert(trials, rng, opts):
    records = []
    for i in range(trials):
        base = _random_d4_variant(rng)
        M = random_hermitian(int(rng.integers(1, 4)), rng)
        inserted = dirac_tensor_insert(base, M)
        doubled = dirac_tensor_insert(base, 2 * M)
        e = random_hermitian(2, rng)
        gap = abs(lipschitz_seminorm(inserted, e) - lipschitz_seminorm(base, e))
        scale_gap = float(np.max(np.abs(inserted.dirac.matrix - doubled.dirac.matrix)))
        records.append(
            TrialRecord(
                label=f"{base.dirac.tag} M{M.shape[0]}",
                deviation=max(gap, scale_gap),
                values={"seminorm_gap": gap, "scale_gap": scale_gap},
            )
        )
    return records


@suite(
    "example-d8",
    "D_8 = 1/4 (sigma_2 (x) M~ (x) sigma_1 + sigma_3 (x) M~ (x) sigma_2 + sigma_1 (x) M~ (x) sigma_3)",
    covers={"dirac_tensor_insert", "dirac_d4", "lipschitz_seminorm"},
)
def _example_d8(trials, rng, opts):
    base = dirac_d4(perm=(3, 1, 2))
    records = []
    for i in range(trials):
        M = random_hermitian(2, rng)
        Mt = M / operator_norm(M)
        d8 = dirac_tensor_insert(base, M)
        explicit = (
            kron(pauli(2), Mt, pauli(1)) + kron(pauli(3), Mt, pauli(2)) + kron(pauli(1), Mt, pauli(3))
        ) / 4
        build_gap = float(np.max(np.abs(d8.dirac.matrix - explicit)))
        e = random_traceless_hermitian(2, rng)
        records.append(
            TrialRecord(
                label=f"M#{i}",
                deviation=max(build_gap, _isometry_deviation(d8, e)),
                values={"build_gap": build_gap},
            )
        )
    return records


@suite(
    "corollary-bloch",
    "on D_4 the distance of two qubits is the Euclidean distance of their Bloch vectors",
    covers={"connes_distance", "density_from_bloch", "bloch_from_density", "dirac_d4"},
)
def _corollary_bloch(trials, rng, opts):
    t = dirac_d4()
    records = []
    for i in range(trials):
        r1 = random_bloch(rng, pure=i % 3 == 0)
        r2 = random_bloch(rng, pure=i % 2 == 0)
        rho1, rho2 = density_from_bloch(r1), density_from_bloch(r2)
        d = connes_distance(t, rho1, rho2, opts).distance
        expected = float(np.linalg.norm(r1 - r2))
        round_trip = float(np.max(np.abs(bloch_from_density(rho1).r - r1)))
        records.append(
            TrialRecord(
                label=f"pair#{i}",
                deviation=max(abs(d - expected), round_trip),
                values={"distance": d, "expected": expected},
            )
        )
    return records


@suite(
    "lemma-ball-closure",
    "on isometric triples the ball and its unit sphere are closed under unitary conjugation",
    covers={"lipschitz_seminorm", "dirac_d4", "dirac_corner"},
)
def _lemma_ball_closure(trials, rng, opts):
    records = []
    for t in (dirac_d4(), dirac_corner(2)):
        for i in range(trials):
            e = random_traceless_hermitian(2, rng)
            e /= lipschitz_seminorm(t, e)
            U = random_unitary(2, rng)
            mismatches = 0
            for scale in (0.5, 1.0, 2.0):
                x = scale * e
                if ball_class(t, x) != ball_class(t, U @ x @ U.conj().T):
                    mismatches += 1
            gap = abs(lipschitz_seminorm(t, U @ e @ U.conj().T) - 1.0)
            records.append(
                TrialRecord(label=f"{t.label}#{i}", deviation=max(gap, float(mismatches)))
            )
    return records
