"""
JSON descriptions of triples and states.

Complex entries are written as ``[re, im]`` pairs. A TripleSpec names a
representation and a Dirac constructor; ``to_triple`` resolves it with the
constructors of :mod:`spectral_metric.triple`.
"""

from pathlib import Path
from typing import Literal, Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, TypeAdapter, ValidationError, model_validator

from spectral_metric.errors import ContractError, SchemaError
from spectral_metric.matcore import ComplexMatrix, pauli_string
from spectral_metric.states import DensityMatrix, density_from_bloch
from spectral_metric.triple import (
    D4Level,
    IsometryFlag,
    Representation,
    RepresentationKind,
    SpectralTriple,
    dirac_corner,
    dirac_d4,
    dirac_d4n,
    dirac_tensor_insert,
    dirac_two_point,
    triple_from_dirac,
    with_isometry,
)

ComplexRows = list[list[tuple[float, float]]]

_CONSTRUCTED_KINDS = {
    "two_point": RepresentationKind.IDENTITY,
    "corner": RepresentationKind.CORNER,
    "d4": RepresentationKind.DIAGONAL,
    "d4n": RepresentationKind.DIAGONAL,
    "tensor_insert": RepresentationKind.DIAGONAL,
}


def encode_matrix(m: ComplexMatrix) -> ComplexRows:
    return [[(float(z.real), float(z.imag)) for z in row] for row in np.asarray(m, dtype=complex)]


def decode_matrix(rows: ComplexRows) -> ComplexMatrix:
    try:
        pairs = np.array(rows, dtype=float)
    except ValueError as e:
        raise SchemaError(f"matrix rows must have equal lengths: {e}") from e
    if pairs.ndim != 3 or pairs.shape[-1] != 2:
        raise SchemaError(f"expected rows of [re, im] pairs, got shape {pairs.shape}")
    return pairs[..., 0] + 1j * pairs[..., 1]


class _JsonModel(BaseModel):
    def to_json(self, indent: int = 2) -> str:
        return self.model_dump_json(indent=indent, exclude_none=True)

    def to_file(self, file_path: Path, indent: int = 2) -> None:
        with file_path.open("w") as f:
            f.write(self.to_json(indent=indent))

    @classmethod
    def from_json(cls, json_str: str):
        try:
            return cls.model_validate_json(json_str)
        except ValidationError as e:
            logger.error(f"{cls.__name__} rejected: {e.error_count()} errors")
            raise SchemaError(f"invalid {cls.__name__}: {e}") from e

    @classmethod
    def from_file(cls, file_path: Path):
        with file_path.open("r") as f:
            json_str = f.read()
        return cls.from_json(json_str)


class RepresentationSpec(_JsonModel):
    kind: RepresentationKind
    copies: Optional[int] = None
    basis_images: Optional[list[ComplexRows]] = None

    def build(self, n: int) -> Representation:
        if self.kind == RepresentationKind.IDENTITY:
            return Representation.identity(n)
        if self.kind == RepresentationKind.DIAGONAL:
            return Representation.diagonal(n, self.copies or 1)
        if self.kind == RepresentationKind.CORNER:
            return Representation.corner(n)
        if self.basis_images is None:
            raise SchemaError("custom representation needs basis_images")
        return Representation.custom(n, [decode_matrix(m) for m in self.basis_images])


class PauliTerm(_JsonModel):
    coeff: float
    string: list[Literal["I", "X", "Y", "Z"]]
    sign: Literal[1, -1] = 1


class LevelSpec(_JsonModel):
    left: tuple[int, int, int] = (1, 2, 3)
    right: tuple[int, int, int] = (1, 2, 3)
    signs: tuple[int, int, int] = (1, 1, 1)


class DiracSpec(_JsonModel):
    kind: Literal["two_point", "corner", "d4", "d4n", "tensor_insert", "pauli_sum", "matrix"]
    signs: Optional[tuple[int, int, int]] = None
    perm: Optional[tuple[int, int, int]] = None
    levels: Optional[list[LevelSpec]] = None
    base: Optional["DiracSpec"] = None
    insert: Optional[ComplexRows] = None
    terms: Optional[list[PauliTerm]] = None
    matrix: Optional[ComplexRows] = None

    @model_validator(mode="after")
    def check_parameters(self):
        needs = {
            "d4n": "levels",
            "tensor_insert": "insert",
            "pauli_sum": "terms",
            "matrix": "matrix",
        }
        if self.kind in needs and getattr(self, needs[self.kind]) is None:
            raise ValueError(f"dirac kind {self.kind!r} needs {needs[self.kind]!r}")
        if self.kind == "tensor_insert" and (self.base is None or self.base.kind not in ("d4", "d4n", "tensor_insert")):
            raise ValueError("tensor_insert needs a d4, d4n or tensor_insert base")
        return self

    def constructed(self, n: int) -> SpectralTriple:
        """Triples whose representation is fixed by the constructor."""
        if self.kind == "two_point":
            return dirac_two_point()
        if self.kind == "corner":
            return dirac_corner(n)
        if self.kind == "d4":
            return dirac_d4(self.signs or (1, 1, 1), self.perm or (1, 2, 3))
        if self.kind == "d4n":
            return dirac_d4n([D4Level(lv.left, lv.right, lv.signs) for lv in self.levels])
        return dirac_tensor_insert(self.base.constructed(n), decode_matrix(self.insert))

    def matrix_for(self, hilbert_dim: int) -> ComplexMatrix:
        if self.kind == "matrix":
            return decode_matrix(self.matrix)
        D = np.zeros((hilbert_dim, hilbert_dim), dtype=complex)
        for term in self.terms:
            if 2 ** len(term.string) != hilbert_dim:
                raise SchemaError(f"Pauli string {''.join(term.string)} does not act on C^{hilbert_dim}")
            D += term.coeff * pauli_string(term.string, term.sign)
        return D


DiracSpec.model_rebuild()


class TripleSpec(_JsonModel):
    algebra_dim: int
    representation: RepresentationSpec
    dirac: DiracSpec
    subalgebra_mask: Optional[list[int]] = None
    isometric: Optional[IsometryFlag] = None

    def to_triple(self) -> SpectralTriple:
        n = self.algebra_dim
        if self.dirac.kind in _CONSTRUCTED_KINDS:
            expected = _CONSTRUCTED_KINDS[self.dirac.kind]
            if self.representation.kind != expected:
                raise SchemaError(
                    f"dirac kind {self.dirac.kind!r} needs a {expected.value} representation, "
                    f"got {self.representation.kind.value}"
                )
            t = self.dirac.constructed(n)
            if t.algebra_dim != n:
                raise SchemaError(f"dirac kind {self.dirac.kind!r} acts on M_{t.algebra_dim}, not M_{n}")
        else:
            rep = self.representation.build(n)
            t = triple_from_dirac(
                rep, self.dirac.matrix_for(rep.hilbert_dim), allowed=self.subalgebra_mask
            )
        if self.isometric is not None:
            try:
                t = with_isometry(t, self.isometric)
            except ContractError as e:
                raise SchemaError(str(e)) from e
        logger.debug(f"resolved {t}")
        return t


class StateSpec(_JsonModel):
    label: Optional[str] = None
    bloch: Optional[tuple[float, float, float]] = None
    matrix: Optional[ComplexRows] = None

    @model_validator(mode="after")
    def exactly_one(self):
        if (self.bloch is None) == (self.matrix is None):
            raise ValueError("a state needs exactly one of 'bloch' or 'matrix'")
        return self

    def to_density(self) -> DensityMatrix:
        if self.bloch is not None:
            return density_from_bloch(self.bloch)
        return DensityMatrix(decode_matrix(self.matrix))

    def display_label(self, index: int) -> str:
        return self.label or f"s{index}"


_STATE_LIST = TypeAdapter(list[StateSpec])


def states_from_json(json_str: str) -> list[StateSpec]:
    try:
        return _STATE_LIST.validate_json(json_str)
    except ValidationError as e:
        raise SchemaError(f"invalid state list: {e}") from e


def states_from_file(file_path: Path) -> list[StateSpec]:
    return states_from_json(file_path.read_text())


class ElementSpec(_JsonModel):
    """An algebra element for the seminorm command."""

    matrix: ComplexRows

    def to_matrix(self) -> ComplexMatrix:
        return decode_matrix(self.matrix)
