try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class Tolerances(BaseModel):
    """Single table of numerical tolerances shared by library and tests."""

    model_config = ConfigDict(frozen=True)

    construction: float = 1e-12
    verification: float = 1e-10
    kernel_cut: float = 1e-9
    degenerate_eigenvalue: float = 1e-10
    isometry: float = 1e-9
    coincident_states: float = 1e-12
    finiteness: float = 1e-9

    def __str__(self):
        return "\n".join(f"{k}={v:g}" for k, v in self.model_dump().items())


TOL = Tolerances()


class SolverOptions(BaseModel):
    tol: float = Field(default=1e-6, gt=0)
    max_bisection: int = Field(default=60, ge=1)
    inner_iters: int = Field(default=5000, ge=1)
    restarts: int = Field(default=8, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    patience: int = Field(default=200, ge=1)
    degeneracy: float = Field(default=1e-8, ge=0)
    polish: bool = True
    force_bisection: bool = False

    def __str__(self):
        return (
            f"tol={self.tol:g}\nmax_bisection={self.max_bisection}\n"
            f"inner_iters={self.inner_iters}\nrestarts={self.restarts}\n"
            f"seed={self.seed}\nforce_bisection={self.force_bisection}"
        )


class VerifyOptions(BaseModel):
    trials: int = Field(default=25, ge=1)
    seed: int = Field(default=0, ge=0)


class ToolkitConfig(BaseModel):
    solver: SolverOptions = SolverOptions()
    verify: VerifyOptions = VerifyOptions()

    @classmethod
    def from_toml(cls, path: Path):
        with path.open("rb") as f:
            config = tomllib.load(f)

        return cls(**config)

    def merged(self, **overrides: Optional[object]) -> SolverOptions:
        """Solver options with non-None command-line overrides applied."""
        updates = {k: v for k, v in overrides.items() if v is not None}
        return SolverOptions(**{**self.solver.model_dump(), **updates})
