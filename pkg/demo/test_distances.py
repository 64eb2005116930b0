from pathlib import Path
import sys

import numpy as np
from loguru import logger

from spectral_metric import SolverOptions, TripleSpec, connes_distance, density_from_bloch, run_suite
from spectral_metric.schema import DiracSpec, RepresentationSpec
from spectral_metric.triple import RepresentationKind, scale_dirac


logger.remove()
logger.add(sys.stderr, level="INFO")


def main():
    outdir = Path("demo/triples").resolve()
    outdir.mkdir(parents=True, exist_ok=True)

    spec = TripleSpec(
        algebra_dim=2,
        representation=RepresentationSpec(kind=RepresentationKind.DIAGONAL, copies=2),
        dirac=DiracSpec(kind="d4"),
    )
    spec.to_file(outdir / "d4.json")
    logger.info(f"Wrote {outdir / 'd4.json'}; try `spectral-metric distance` on it")

    t = TripleSpec.from_file(outdir / "d4.json").to_triple()
    logger.info(f"Loaded triple: {t}")

    pairs = [
        ((0.0, 0.0, 1.0), (1.0, 0.0, 0.0)),
        ((0.0, 0.0, 1.0), (0.0, 0.0, -1.0)),
        ((0.3, -0.2, 0.1), (0.0, 0.5, 0.5)),
    ]
    for r1, r2 in pairs:
        rho1, rho2 = density_from_bloch(r1), density_from_bloch(r2)
        closed = connes_distance(t, rho1, rho2)
        forced = connes_distance(t, rho1, rho2, SolverOptions(force_bisection=True))
        halved = connes_distance(scale_dirac(t, 2.0), rho1, rho2)
        logger.info(
            f"{r1} vs {r2}: |dr|={np.linalg.norm(np.subtract(r1, r2)):.6f} "
            f"closed={closed.distance:.6f} bisection={forced.distance:.6f} 2D={halved.distance:.6f}"
        )

    for name in ["lemma-d4", "corollary-bloch", "lemma-centralizer"]:
        logger.info(str(run_suite(name, trials=10)))


if __name__ == "__main__":
    main()
