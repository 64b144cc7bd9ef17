"""Seedable construction of random and structured operator families.

Randomness comes from SplitMix64, a counter-based 64-bit generator: output
k is the SplitMix64 finalizer applied to seed + (k+1) * GOLDEN, all in
wrapping uint64 arithmetic. The integer stream is exactly portable;
uniforms take the top 53 bits, and Gaussians come from the basic Box-Muller
transform on (0, 1] x [0, 1) pairs. Complex Gaussian entries have
independent N(0, 1/2) real and imaginary parts, so their second moment is 1.

Derived seeds (per trial, per family, ...) come from ``mix_seed``, which
folds each index into the state with the same finalizer. Generation is pure:
equal specs, including the seed, produce bit-identical families.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .matrix_core import ComplexMatrix, OperatorFamily

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
GOLDEN = 0x9E3779B97F4A7C15
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO53 = float(1 << 53)

KINDS = (
    "ginibre",
    "hermitian",
    "psd",
    "real",
    "diagonal",
    "scalar",
    "rank_deficient",
    "with_zeros",
    "mean_centered",
    "pair_equal_sums",
)

_SQUARE_KINDS = ("hermitian", "psd")


def _finalize(z: np.ndarray) -> np.ndarray:
    # uint64 array arithmetic wraps silently; scalars would warn, so the
    # scalar path below uses plain Python integers instead.
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


_MASK_INT = 0xFFFFFFFFFFFFFFFF


def _finalize_int(z: int) -> int:
    z &= _MASK_INT
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK_INT
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK_INT
    return (z ^ (z >> 31)) & _MASK_INT


def mix_seed(base: int, *parts: int) -> int:
    """Stated mixing function for derived seeds.

    Each part is folded in as state = finalize(state + (part + 1) * GOLDEN);
    the result is a plain 64-bit integer usable as a new seed.
    """
    state = base & _MASK_INT
    for part in parts:
        state = _finalize_int(state + ((part & _MASK_INT) + 1) * GOLDEN)
    return state


class SplitMix64:
    """Counter-based SplitMix64 stream of uniforms and Gaussians."""

    def __init__(self, seed: int):
        self._seed = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
        self._count = 0

    def next_u64(self, count: int) -> np.ndarray:
        ctr = np.arange(self._count + 1, self._count + count + 1, dtype=np.uint64)
        self._count += count
        return _finalize(self._seed + ctr * np.uint64(GOLDEN))

    def uniforms(self, count: int) -> np.ndarray:
        """float64 in [0, 1) from the top 53 bits."""
        return (self.next_u64(count) >> np.uint64(11)).astype(np.float64) / _TWO53

    def gaussians(self, count: int) -> np.ndarray:
        """Standard normals via Box-Muller (pairs; cropped to count)."""
        half = (count + 1) // 2
        u1 = ((self.next_u64(half) >> np.uint64(11)).astype(np.float64) + 1.0) / _TWO53
        u2 = self.uniforms(half)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        out = np.empty(2 * half, dtype=np.float64)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:count]

    def complex_gaussians(self, count: int) -> np.ndarray:
        """complex128 with i.i.d. N(0, 1/2) parts (unit second moment)."""
        g = self.gaussians(2 * count)
        return (g[0::2] + 1j * g[1::2]) / np.sqrt(2.0)


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for one family draw.

    ``zeros`` forces that many leading members to the exact zero matrix and
    is honored by every kind (the ``with_zeros`` kind is a Ginibre base where
    this count is the point). ``scalar`` requires a 1x1 shape, ``hermitian``
    and ``psd`` require square shapes.
    """

    kind: str
    n: int
    rows: int
    cols: int
    scale: float = 1.0
    seed: int = 0
    zeros: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValidationError(f"unknown generator kind {self.kind!r}")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValidationError("n must be an integer >= 1")
        if not (isinstance(self.rows, int) and isinstance(self.cols, int)):
            raise ValidationError("rows and cols must be integers")
        if self.rows < 1 or self.cols < 1:
            raise ValidationError("rows and cols must be positive")
        if not (isinstance(self.scale, (int, float)) and self.scale > 0):
            raise ValidationError("scale must be positive")
        if not (isinstance(self.zeros, int) and 0 <= self.zeros <= self.n):
            raise ValidationError("zeros must be an integer in [0, n]")
        if self.kind in _SQUARE_KINDS and self.rows != self.cols:
            raise ValidationError(f"kind {self.kind!r} requires rows == cols")
        if self.kind == "scalar" and (self.rows, self.cols) != (1, 1):
            raise ValidationError("kind 'scalar' requires a 1x1 shape")
        if not isinstance(self.seed, int):
            raise ValidationError("seed must be an integer")
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "seed", self.seed & 0xFFFFFFFFFFFFFFFF)

    def with_seed(self, seed: int) -> "GeneratorSpec":
        return replace(self, seed=seed)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "rows": self.rows,
            "cols": self.cols,
            "scale": self.scale,
            "seed": self.seed,
            "zeros": self.zeros,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GeneratorSpec":
        if not isinstance(obj, dict):
            raise ValidationError("generator spec must be a JSON object")
        try:
            return cls(
                kind=str(obj.get("kind", "ginibre")),
                n=int(obj.get("n", 1)),
                rows=int(obj.get("rows", 1)),
                cols=int(obj.get("cols", 1)),
                scale=float(obj.get("scale", 1.0)),
                seed=int(obj.get("seed", 0)),
                zeros=int(obj.get("zeros", 0)),
            )
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad generator spec: {exc}") from exc


def _draw_member(spec: GeneratorSpec, stream: SplitMix64) -> np.ndarray:
    rows, cols, scale = spec.rows, spec.cols, spec.scale
    kind = spec.kind
    if kind in ("ginibre", "with_zeros", "mean_centered", "scalar"):
        return scale * stream.complex_gaussians(rows * cols).reshape(rows, cols)
    if kind == "real":
        return scale * (
            stream.gaussians(rows * cols).reshape(rows, cols).astype(np.complex128)
        )
    if kind == "hermitian":
        g = stream.complex_gaussians(rows * cols).reshape(rows, cols)
        return scale * (g + g.conj().T) / 2.0
    if kind == "psd":
        g = stream.complex_gaussians(rows * cols).reshape(rows, cols)
        m = g.conj().T @ g
        return scale * (m + m.conj().T) / 2.0
    if kind == "diagonal":
        d = min(rows, cols)
        m = np.zeros((rows, cols), dtype=np.complex128)
        m[np.arange(d), np.arange(d)] = stream.complex_gaussians(d)
        return scale * m
    if kind == "rank_deficient":
        k = min(rows, cols) - 1
        if k == 0:
            return np.zeros((rows, cols), dtype=np.complex128)
        left = stream.complex_gaussians(rows * k).reshape(rows, k)
        right = stream.complex_gaussians(k * cols).reshape(k, cols)
        return scale * (left @ right) / np.sqrt(k)
    raise ValidationError(f"kind {kind!r} has no single-member draw")


def generate(spec: GeneratorSpec) -> OperatorFamily:
    """Draw one family deterministically from the spec.

    The first ``zeros`` members are exact zero matrices; ``mean_centered``
    subtracts the family mean so the family sum is zero up to roundoff
    (below 1e-13 * scale at desk scale).
    """
    if spec.kind == "pair_equal_sums":
        raise ValidationError(
            "kind 'pair_equal_sums' draws two families; use generate_pair_equal_sums"
        )
    stream = SplitMix64(spec.seed)
    arrays = []
    for idx in range(spec.n):
        if idx < spec.zeros:
            arrays.append(np.zeros((spec.rows, spec.cols), dtype=np.complex128))
        else:
            arrays.append(_draw_member(spec, stream))
    if spec.kind == "mean_centered":
        mean = sum(arrays) / spec.n
        arrays = [m - mean for m in arrays]
    return OperatorFamily(ComplexMatrix.from_array(m) for m in arrays)


def generate_pair_equal_sums(
    spec: GeneratorSpec,
) -> tuple[OperatorFamily, OperatorFamily]:
    """Two independent draws adjusted so their family sums match.

    The second family receives (sum A - sum B) / n added to each member,
    leaving the constraint residual at roundoff (below 1e-13 * scale). For
    n = 1 the constraint forces b_1 = a_1 exactly, so the first member is
    copied.
    """
    if spec.kind != "pair_equal_sums":
        raise ValidationError("spec kind must be 'pair_equal_sums'")
    stream = SplitMix64(spec.seed)
    base = replace(spec, kind="ginibre")
    a_arrays = [
        np.zeros((spec.rows, spec.cols), dtype=np.complex128)
        if idx < spec.zeros
        else _draw_member(base, stream)
        for idx in range(spec.n)
    ]
    b_arrays = [
        np.zeros((spec.rows, spec.cols), dtype=np.complex128)
        if idx < spec.zeros
        else _draw_member(base, stream)
        for idx in range(spec.n)
    ]
    if spec.n == 1:
        b_arrays = [a_arrays[0].copy()]
    else:
        shift = (sum(a_arrays) - sum(b_arrays)) / spec.n
        b_arrays = [m + shift for m in b_arrays]
    return (
        OperatorFamily(ComplexMatrix.from_array(m) for m in a_arrays),
        OperatorFamily(ComplexMatrix.from_array(m) for m in b_arrays),
    )


def random_unitary(dim: int, seed: int) -> ComplexMatrix:
    """Unitary matrix from Gram-Schmidt on a Ginibre draw.

    Columns are orthonormalized twice (a re-orthogonalization pass), which
    keeps ||U*U - I||_F well below 1e-12 * dim. The measure is close to, but
    not certified as, Haar.
    """
    if not (isinstance(dim, int) and dim >= 1):
        raise ValidationError("dim must be an integer >= 1")
    stream = SplitMix64(int(seed))
    g = stream.complex_gaussians(dim * dim).reshape(dim, dim)
    u = g.astype(np.complex128)
    for _ in range(2):
        for j in range(dim):
            col = u[:, j]
            for k in range(j):
                col = col - (u[:, k].conj() @ col) * u[:, k]
            norm = np.linalg.norm(col)
            if norm < 1e-12:
                # Degenerate draw (essentially impossible): fall back to a
                # deterministic basis vector and keep orthonormalizing.
                col = np.zeros(dim, dtype=np.complex128)
                col[j] = 1.0
                for k in range(j):
                    col = col - (u[:, k].conj() @ col) * u[:, k]
                norm = np.linalg.norm(col)
            u[:, j] = col / norm
    return ComplexMatrix.from_array(u)
