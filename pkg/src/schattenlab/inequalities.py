"""Evaluators for the parallelogram-type Schatten p-norm claims.

Each evaluator computes both sides of one displayed claim on concrete
families, orients the inequality by the p-regime (forward for p <= 2,
reversed for p >= 2, an equality claim at exactly p = 2) and returns a
CheckResult. Full double sums over (i, j) are computed exactly as the claims
state them, including the zero i = j terms and both (i, j)/(j, i)
duplicates; nothing is rewritten through the factor-2 symmetry, which is
instead asserted by the test suite.

Conventions for edge cases:

* a difference grid with nonzero count D = 0 contributes 0 to a bracketed
  term (its norm sum vanishes too), so 0 is never raised to a negative power;
* instances in which every member of every input family is exactly zero are
  reported as ``degenerate`` rather than as substantive equalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, ValidationError
from .matrix_core import OperatorFamily, frobenius_array
from .parallelogram import DEFAULT_EPSILON_ZERO, d_constant_grid, _require_pair
from .results import CheckResult, TolerancePolicy, build_check
from .spectral import SchattenOrder, _pth_power_array, as_order

#: Relative tolerance on the constraint residual of the constrained claims.
CONSTRAINT_RTOL = 1e-10

REMARK_VARIANTS = ("paper_2n2", "consistent_n2")


@dataclass(frozen=True)
class ThreeFamilyInstance:
    """Three same-shaped families of common size."""

    a: OperatorFamily
    b: OperatorFamily
    c: OperatorFamily

    def __post_init__(self) -> None:
        _require_pair(self.a, self.b)
        _require_pair(self.b, self.c)

    @property
    def n(self) -> int:
        return self.a.n

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape


def _direction(p: float) -> str:
    if p == 2.0:
        return "eq"
    return "geq" if p < 2.0 else "leq"


def _all_zero(*families: OperatorFamily) -> bool:
    return all(
        frobenius_array(m.data) == 0.0 for f in families for m in f
    )


def _grid_pth_power(
    fa: OperatorFamily, fb: OperatorFamily, p: float
) -> float:
    """sum_{i,j} ||a_i - b_j||_p^p over the full grid, as stated."""
    total = 0.0
    for ai in fa:
        ad = ai.data
        for bj in fb:
            total += _pth_power_array(ad - bj.data, p)
    return total


def _hs_sq(arr: np.ndarray) -> float:
    """Squared Schatten 2-norm via the entrywise norm (they coincide)."""
    return float(np.vdot(arr, arr).real)


def _grid_hs_sq(fa: OperatorFamily, fb: OperatorFamily) -> float:
    total = 0.0
    for ai in fa:
        ad = ai.data
        for bj in fb:
            total += _hs_sq(ad - bj.data)
    return total


def _sum_diff(fa: OperatorFamily, fb: OperatorFamily) -> np.ndarray:
    total = np.zeros(fa.shape, dtype=np.complex128)
    for ai, bi in zip(fa, fb):
        total += ai.data - bi.data
    return total


def _family_scale(*families: OperatorFamily) -> float:
    return max(
        1.0, max(frobenius_array(m.data) for f in families for m in f)
    )


def eval_equality_13(
    a: OperatorFamily,
    b: OperatorFamily,
    policy: TolerancePolicy | None = None,
) -> CheckResult:
    """Two-family parallelogram equality for the Schatten 2-norm.

    lhs = sum_{i,j} ||a_i - a_j||_2^2 + sum_{i,j} ||b_i - b_j||_2^2,
    rhs = 2 sum_{i,j} ||a_i - b_j||_2^2 - 2 ||sum_i (a_i - b_i)||_2^2.
    An exact identity; the check direction is ``eq``.
    """
    _require_pair(a, b)
    lhs = _grid_hs_sq(a, a) + _grid_hs_sq(b, b)
    rhs = 2.0 * _grid_hs_sq(a, b) - 2.0 * _hs_sq(_sum_diff(a, b))
    return build_check(
        "eq13", 2.0, a.n, a.shape, lhs, rhs, "eq", policy,
        degenerate=_all_zero(a, b),
    )


def eval_theorem21(
    inst: ThreeFamilyInstance,
    p: "SchattenOrder | float",
    epsilon_zero: float = DEFAULT_EPSILON_ZERO,
    policy: TolerancePolicy | None = None,
) -> CheckResult:
    """Three-family inequality with difference-grid coefficients.

    lhs sums the within-family grids ||x_i - x_j||_p^p over the three
    families; rhs is the bracketed cross-grid sum, each grid weighted by its
    nonzero count D to the power (p-2)/2, minus the three pairwise
    ||sum_i (x_i - y_i)||_p^p terms. Forward (lhs >= rhs) for p <= 2,
    reversed for p >= 2.
    """
    order = as_order(p)
    q = order.p
    a, b, c = inst.a, inst.b, inst.c
    lhs = (
        _grid_pth_power(a, a, q)
        + _grid_pth_power(b, b, q)
        + _grid_pth_power(c, c, q)
    )
    extras: dict = {}
    bracket = 0.0
    for key, (fx, fy) in (
        ("d_ab", (a, b)),
        ("d_bc", (b, c)),
        ("d_ca", (c, a)),
    ):
        d = d_constant_grid(fx, fy, epsilon_zero)
        extras[key] = d.count
        if d.count > 0:
            bracket += float(d.count) ** ((q - 2.0) / 2.0) * _grid_pth_power(
                fx, fy, q
            )
        # D = 0 forces the grid sum to zero as well; the term contributes 0.
    sums = (
        _pth_power_array(_sum_diff(a, b), q)
        + _pth_power_array(_sum_diff(b, c), q)
        + _pth_power_array(_sum_diff(c, a), q)
    )
    rhs = bracket - sums
    return build_check(
        "thm21", q, inst.n, inst.shape, lhs, rhs, _direction(q), policy,
        degenerate=_all_zero(a, b, c), extras=extras,
    )


def eval_prop22(
    a: OperatorFamily,
    b: OperatorFamily,
    p: "SchattenOrder | float",
    policy: TolerancePolicy | None = None,
) -> CheckResult:
    """Two-family inequality with coefficient 2 n^(p-2).

    lhs = within-family grid sums; rhs = 2 n^(p-2) sum_{i,j} ||a_i - b_j||_p^p
    minus 2 ||sum_i (a_i - b_i)||_p^p. Forward for p <= 2, reversed for p >= 2;
    both collapse to the 2-norm equality at p = 2.
    """
    order = as_order(p)
    q = order.p
    _require_pair(a, b)
    n = a.n
    lhs = _grid_pth_power(a, a, q) + _grid_pth_power(b, b, q)
    rhs = 2.0 * float(n) ** (q - 2.0) * _grid_pth_power(a, b, q) - 2.0 * (
        _pth_power_array(_sum_diff(a, b), q)
    )
    return build_check(
        "prop22", q, n, a.shape, lhs, rhs, _direction(q), policy,
        degenerate=_all_zero(a, b),
    )


def eval_cor23(
    a: OperatorFamily,
    b: OperatorFamily,
    p: "SchattenOrder | float",
    policy: TolerancePolicy | None = None,
) -> CheckResult:
    """The prop22 claim under the equal-sums constraint (sum a_i = sum b_i).

    The vanishing sum term is dropped from the right-hand side. The
    constraint is a checked precondition, not something the evaluator fixes.
    """
    order = as_order(p)
    q = order.p
    _require_pair(a, b)
    scale = _family_scale(a, b)
    residual = frobenius_array(_sum_diff(a, b))
    if residual > CONSTRAINT_RTOL * scale:
        raise PreconditionError(
            f"family sums differ: ||sum a - sum b||_F = {residual:.6e} "
            f"exceeds {CONSTRAINT_RTOL:.0e} * scale = {CONSTRAINT_RTOL * scale:.6e}",
            residual=residual,
        )
    n = a.n
    lhs = _grid_pth_power(a, a, q) + _grid_pth_power(b, b, q)
    rhs = 2.0 * float(n) ** (q - 2.0) * _grid_pth_power(a, b, q)
    return build_check(
        "cor23", q, n, a.shape, lhs, rhs, _direction(q), policy,
        degenerate=_all_zero(a, b),
        extras={"constraint_residual": residual},
    )


def eval_cor24(
    a: OperatorFamily,
    p: "SchattenOrder | float",
    policy: TolerancePolicy | None = None,
) -> CheckResult:
    """Single zero-sum family: grid sum against 2 n^(p-1) sum ||a_i||_p^p."""
    order = as_order(p)
    q = order.p
    scale = _family_scale(a)
    total = np.zeros(a.shape, dtype=np.complex128)
    for m in a:
        total += m.data
    residual = frobenius_array(total)
    if residual > CONSTRAINT_RTOL * scale:
        raise PreconditionError(
            f"family sum is not zero: ||sum a||_F = {residual:.6e} "
            f"exceeds {CONSTRAINT_RTOL:.0e} * scale = {CONSTRAINT_RTOL * scale:.6e}",
            residual=residual,
        )
    n = a.n
    lhs = _grid_pth_power(a, a, q)
    rhs = 2.0 * float(n) ** (q - 1.0) * math.fsum(
        _pth_power_array(m.data, q) for m in a
    )
    return build_check(
        "cor24", q, n, a.shape, lhs, rhs, _direction(q), policy,
        degenerate=_all_zero(a),
        extras={"constraint_residual": residual},
    )


def eval_prop25(
    a: OperatorFamily,
    b: OperatorFamily,
    p: "SchattenOrder | float",
    policy: TolerancePolicy | None = None,
) -> CheckResult:
    """Reverse-direction companion of prop22.

    lhs = 2 (n^2 - n + 1)^((2-p)/2) sum_{i,j} ||a_i - b_j||_p^p
          - 2 ||sum_i (a_i - b_i)||_p^p,
    rhs = the within-family grid sums. Forward (lhs >= rhs) for p <= 2,
    reversed for p >= 2.
    """
    order = as_order(p)
    q = order.p
    _require_pair(a, b)
    n = a.n
    coeff = float(n * n - n + 1) ** ((2.0 - q) / 2.0)
    lhs = 2.0 * coeff * _grid_pth_power(a, b, q) - 2.0 * _pth_power_array(
        _sum_diff(a, b), q
    )
    rhs = _grid_pth_power(a, a, q) + _grid_pth_power(b, b, q)
    return build_check(
        "prop25", q, n, a.shape, lhs, rhs, _direction(q), policy,
        degenerate=_all_zero(a, b), extras={"coefficient": coeff},
    )


def sandwich(
    a: OperatorFamily,
    b: OperatorFamily,
    p: "SchattenOrder | float",
    policy: TolerancePolicy | None = None,
) -> tuple[CheckResult, CheckResult]:
    """Joint view of prop22 and prop25 bracketing the same instance.

    At p = 2 both slacks vanish together (the 2-norm equality).
    """
    return (
        eval_prop22(a, b, p, policy),
        eval_prop25(a, b, p, policy),
    )


def remark_constants(
    n: int,
    p: "SchattenOrder | float",
    variant: str = "consistent_n2",
    policy: TolerancePolicy | None = None,
) -> CheckResult:
    """Strict two-sided sandwich of the middle coefficient, 0 < p <= 2.

    Checks n^(p-2) < K^((2-p)/2) < n^(2-p), where K is 2n^2 - n + 1 for
    variant ``paper_2n2`` (the constant exactly as printed in the source
    statement) and n^2 - n + 1 for variant ``consistent_n2`` (the constant
    the surrounding inequalities actually use). Both are computed and
    neither is asserted as ground truth; slack is the smaller of the two
    strict gaps. A gap of zero (p = 2, or n = 1 in the consistent variant)
    cannot certify strictness and yields verdict ``degenerate``.
    """
    if not isinstance(n, int) or n < 1:
        raise ValidationError("n must be an integer >= 1")
    if variant not in REMARK_VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}")
    order = as_order(p)
    q = order.p
    if q > 2.0:
        raise ValidationError("the constant sandwich is scoped to 0 < p <= 2")
    k = 2 * n * n - n + 1 if variant == "paper_2n2" else n * n - n + 1
    left = float(n) ** (q - 2.0)
    middle = float(k) ** ((2.0 - q) / 2.0)
    right = float(n) ** (2.0 - q)
    gap_left = middle - left
    gap_right = right - middle
    slack = min(gap_left, gap_right)
    return build_check(
        "remark_i", q, n, (0, 0), slack, 0.0, "geq", policy,
        strict=True,
        extras={
            "variant": variant,
            "left": left,
            "middle": middle,
            "right": right,
            "gap_left": gap_left,
            "gap_right": gap_right,
        },
    )
