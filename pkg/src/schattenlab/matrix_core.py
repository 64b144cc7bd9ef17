"""Dense complex matrices and operator families.

Matrices are immutable double-precision complex arrays, row-major, fixed at
construction. They stay small (desk scale, up to roughly 64x64), so clarity
and exact validation win over zero-copy tricks. Every operation is a pure
function; values are safe to share across threads and processes.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionError, ValidationError


class ComplexMatrix:
    """Immutable dense complex matrix."""

    __slots__ = ("_data",)

    def __init__(self, rows: int, cols: int, entries: Sequence[complex]):
        if not (isinstance(rows, int) and isinstance(cols, int)):
            raise ValidationError("rows and cols must be integers")
        if rows < 1 or cols < 1:
            raise ValidationError("rows and cols must be positive")
        arr = np.asarray(entries, dtype=np.complex128)
        if arr.ndim != 1 or arr.size != rows * cols:
            raise ValidationError(
                f"expected {rows * cols} row-major entries, got {arr.size}"
            )
        self._init_from(np.ascontiguousarray(arr.reshape(rows, cols)))

    def _init_from(self, arr: np.ndarray) -> None:
        if not np.isfinite(arr.view(np.float64)).all():
            raise ValidationError("matrix entries must be finite (no NaN/Inf)")
        arr.flags.writeable = False
        object.__setattr__(self, "_data", arr)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ComplexMatrix":
        """Wrap a 2-D array (copied into owned, read-only storage)."""
        a = np.array(arr, dtype=np.complex128, order="C", copy=True)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValidationError("expected a non-empty 2-D array")
        self = object.__new__(cls)
        self._init_from(a)
        return self

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[complex]]) -> "ComplexMatrix":
        return cls.from_array(np.asarray(rows, dtype=np.complex128))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ComplexMatrix":
        return cls.from_array(np.zeros((rows, cols), dtype=np.complex128))

    @classmethod
    def identity(cls, dim: int) -> "ComplexMatrix":
        return cls.from_array(np.eye(dim, dtype=np.complex128))

    @property
    def data(self) -> np.ndarray:
        """Read-only ndarray view of the entries."""
        return self._data

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape  # type: ignore[return-value]

    @property
    def entries(self) -> list[complex]:
        """Row-major entry list."""
        return self._data.ravel().tolist()

    def is_square(self) -> bool:
        return self.rows == self.cols

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ComplexMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(
            np.array_equal(self._data, other._data)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"ComplexMatrix({self.rows}x{self.cols})"

    def __add__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        return add(self, other)

    def __sub__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        return sub(self, other)

    def __neg__(self) -> "ComplexMatrix":
        return ComplexMatrix.from_array(-self._data)

    def __matmul__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        return mul(self, other)

    def to_json(self) -> dict:
        """Literal form ``{"rows", "cols", "re", "im"}`` with row-major arrays."""
        flat = self._data.ravel()
        return {
            "rows": self.rows,
            "cols": self.cols,
            "re": flat.real.tolist(),
            "im": flat.imag.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ComplexMatrix":
        """Parse the matrix literal format; ``im`` may be omitted (all-real)."""
        if not isinstance(obj, dict):
            raise ValidationError("matrix literal must be a JSON object")
        for key in ("rows", "cols", "re"):
            if key not in obj:
                raise ValidationError(f"matrix literal missing field {key!r}")
        try:
            rows = int(obj["rows"])
            cols = int(obj["cols"])
            re = np.asarray(obj["re"], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad matrix literal: {exc}") from exc
        if re.ndim != 1 or re.size != rows * cols:
            raise ValidationError(
                f"field 're' must hold {rows * cols} row-major values"
            )
        if "im" in obj and obj["im"] is not None:
            im = np.asarray(obj["im"], dtype=np.float64)
            if im.shape != re.shape:
                raise ValidationError("field 'im' must match 're' in length")
        else:
            im = np.zeros_like(re)
        return cls(rows, cols, (re + 1j * im).tolist())


class OperatorFamily:
    """Ordered list of same-shaped matrices."""

    __slots__ = ("_members",)

    def __init__(self, members: Iterable[ComplexMatrix]):
        ms = tuple(members)
        if not ms:
            raise ValidationError("a family needs at least one member")
        shape = ms[0].shape
        for k, m in enumerate(ms):
            if not isinstance(m, ComplexMatrix):
                raise ValidationError("family members must be ComplexMatrix values")
            if m.shape != shape:
                raise DimensionError(
                    f"member {k} has shape {m.shape}, expected {shape}"
                )
        self._members = ms

    @property
    def members(self) -> tuple[ComplexMatrix, ...]:
        return self._members

    @property
    def n(self) -> int:
        return len(self._members)

    @property
    def shape(self) -> tuple[int, int]:
        return self._members[0].shape

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self) -> Iterator[ComplexMatrix]:
        return iter(self._members)

    def __getitem__(self, idx: int) -> ComplexMatrix:
        return self._members[idx]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OperatorFamily):
            return NotImplemented
        return self._members == other._members

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"OperatorFamily(n={self.n}, shape={self.shape})"

    def to_json(self) -> dict:
        return {"members": [m.to_json() for m in self._members]}

    @classmethod
    def from_json(cls, obj: dict | list) -> "OperatorFamily":
        """Accept ``{"members": [...]}`` or a bare list of matrix literals."""
        if isinstance(obj, dict):
            if "members" not in obj:
                raise ValidationError("family literal missing field 'members'")
            raw = obj["members"]
        else:
            raw = obj
        if not isinstance(raw, list) or not raw:
            raise ValidationError("field 'members' must be a non-empty list")
        return cls(ComplexMatrix.from_json(m) for m in raw)


def _require_same_shape(a: ComplexMatrix, b: ComplexMatrix) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def add(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Entrywise sum."""
    _require_same_shape(a, b)
    return ComplexMatrix.from_array(a.data + b.data)


def sub(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Entrywise difference."""
    _require_same_shape(a, b)
    return ComplexMatrix.from_array(a.data - b.data)


def adjoint(a: ComplexMatrix) -> ComplexMatrix:
    """Conjugate transpose."""
    return ComplexMatrix.from_array(a.data.conj().T)


def mul(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Matrix product."""
    if a.cols != b.rows:
        raise DimensionError(
            f"inner dimensions differ: {a.shape} cannot multiply {b.shape}"
        )
    return ComplexMatrix.from_array(a.data @ b.data)


def gram_array(arr: np.ndarray) -> np.ndarray:
    """adjoint(arr) @ arr, symmetrized to an exactly Hermitian array."""
    m = arr.conj().T @ arr
    return (m + m.conj().T) / 2.0


def gram(a: ComplexMatrix) -> ComplexMatrix:
    """Squared absolute value A*A.

    The product is symmetrized as (M + M*)/2 so the stored representation is
    Hermitian exactly, which the eigensolver's admission check requires.
    """
    return ComplexMatrix.from_array(gram_array(a.data))


def family_sum(f: OperatorFamily) -> ComplexMatrix:
    """Sum of all members."""
    total = np.zeros(f.shape, dtype=np.complex128)
    for m in f:
        total += m.data
    return ComplexMatrix.from_array(total)


def frobenius_array(arr: np.ndarray) -> float:
    return float(np.linalg.norm(arr))


def frobenius(a: ComplexMatrix) -> float:
    """Square root of the sum of squared entry moduli."""
    return frobenius_array(a.data)
