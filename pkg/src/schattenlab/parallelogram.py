"""Exact operator identities and positive-operator norm bounds.

This module evaluates the matrix-level backbone of the whole lab: the exact
parallelogram-type operator identity on two families (as a Frobenius
residual), the nonzero-member count D of a family, and the two-sided bounds
on || sum A_i ||_p^p for positive members, in both the plain (coefficient
n^(p-1)) and the D-refined form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    HermiticityError,
    PositivityError,
    ValidationError,
)
from .matrix_core import (
    ComplexMatrix,
    OperatorFamily,
    frobenius_array,
    gram_array,
)
from .results import CheckResult, TolerancePolicy, build_check
from .spectral import (
    SchattenOrder,
    _check_hermitian,
    _eigenvalues_array,
    as_order,
)

#: Members with Frobenius norm below this times max(1, family max norm)
#: count as zero. Generators emit structural zeros as exact zero matrices,
#: so the default never misclassifies at desk scale.
DEFAULT_EPSILON_ZERO = 1e-13

#: Admission tolerance on the minimum eigenvalue of a "positive" member.
PSD_ADMISSION_RTOL = 1e-10


@dataclass(frozen=True)
class DConstant:
    """Number of nonzero members of a family (or of a difference grid)."""

    count: int
    epsilon_zero: float
    limit: int

    def __post_init__(self) -> None:
        if not (0 <= self.count <= self.limit):
            raise ValidationError(
                f"count {self.count} outside [0, {self.limit}]"
            )
        if not self.epsilon_zero > 0.0:
            raise ValidationError("epsilon_zero must be positive")


def _count_nonzero(norms: list[float], epsilon_zero: float) -> int:
    cutoff = epsilon_zero * max(1.0, max(norms))
    return sum(1 for v in norms if v > cutoff)


def d_constant(
    f: OperatorFamily, epsilon_zero: float = DEFAULT_EPSILON_ZERO
) -> DConstant:
    """Count members whose norm exceeds epsilon_zero relative to the family scale."""
    if not epsilon_zero > 0.0:
        raise ValidationError("epsilon_zero must be positive")
    norms = [frobenius_array(m.data) for m in f]
    return DConstant(_count_nonzero(norms, epsilon_zero), epsilon_zero, f.n)


def d_constant_grid(
    a: OperatorFamily,
    b: OperatorFamily,
    epsilon_zero: float = DEFAULT_EPSILON_ZERO,
) -> DConstant:
    """Nonzero count over the n^2 differences {a_i - b_j}."""
    if not epsilon_zero > 0.0:
        raise ValidationError("epsilon_zero must be positive")
    _require_pair(a, b)
    norms = [
        frobenius_array(ai.data - bj.data) for ai in a for bj in b
    ]
    return DConstant(_count_nonzero(norms, epsilon_zero), epsilon_zero, a.n * b.n)


def _require_pair(a: OperatorFamily, b: OperatorFamily) -> None:
    if a.n != b.n:
        raise DimensionError(f"family sizes differ: {a.n} vs {b.n}")
    if a.shape != b.shape:
        raise DimensionError(f"family shapes differ: {a.shape} vs {b.shape}")


def operator_identity_residual(a: OperatorFamily, b: OperatorFamily) -> float:
    """Frobenius residual of the exact two-family operator identity.

    LHS = sum_{i<j} |a_i - a_j|^2 + sum_{i<j} |b_i - b_j|^2,
    RHS = sum_{i,j} |a_i - b_j|^2 - |sum_i (a_i - b_i)|^2,
    both strict-upper-triangle and full-grid sums exactly as they define the
    identity (no factor-2 rewriting). The identity is exact, so the returned
    ||LHS - RHS||_F is pure roundoff.
    """
    _require_pair(a, b)
    n = a.n
    am = [m.data for m in a]
    bm = [m.data for m in b]
    side = a.cols
    lhs = np.zeros((side, side), dtype=np.complex128)
    for i in range(n - 1):
        for j in range(i + 1, n):
            lhs += gram_array(am[i] - am[j])
            lhs += gram_array(bm[i] - bm[j])
    rhs = np.zeros((side, side), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            rhs += gram_array(am[i] - bm[j])
    total = np.zeros(a.shape, dtype=np.complex128)
    for i in range(n):
        total += am[i] - bm[i]
    rhs -= gram_array(total)
    return frobenius_array(lhs - rhs)


def _psd_pth_powers(
    f: OperatorFamily, p: float
) -> tuple[list[float], float]:
    """Per-member sum(s^p) for positive members, plus the same for their sum.

    Validates Hermiticity and positive semidefiniteness of every member
    (minimum eigenvalue >= -PSD_ADMISSION_RTOL * ||member||_F). For such
    members the singular values are the eigenvalues, clamped at zero.
    """
    member_powers = []
    for idx, m in enumerate(f):
        try:
            _check_hermitian(m.data)
        except (DimensionError, HermiticityError) as exc:
            raise type(exc)(f"family member {idx}: {exc}") from exc
        eig = _eigenvalues_array(m.data)
        floor = -PSD_ADMISSION_RTOL * frobenius_array(m.data)
        if eig[-1] < floor:
            raise PositivityError(
                f"family member {idx} is not positive semidefinite: "
                f"min eigenvalue {eig[-1]:.6e} (tolerance {floor:.6e})",
                index=idx,
                min_eigenvalue=eig[-1],
            )
        member_powers.append(math.fsum(max(e, 0.0) ** p for e in eig))
    total = np.zeros(f.shape, dtype=np.complex128)
    for m in f:
        total += m.data
    eig_sum = _eigenvalues_array(total)
    sum_power = math.fsum(max(e, 0.0) ** p for e in eig_sum)
    return member_powers, sum_power


def _chain_check(
    claim: str,
    f: OperatorFamily,
    order: SchattenOrder,
    coefficient: float,
    policy: TolerancePolicy | None,
    extras: dict,
    degenerate: bool,
) -> CheckResult:
    """Shared chain logic: lower <= middle <= upper for p <= 1, reversed for p >= 1.

    lower  = coefficient * sum_i ||a_i||_p^p
    middle = ||sum_i a_i||_p^p
    upper  = sum_i ||a_i||_p^p

    The reported lhs/rhs pair is the binding (smaller-slack) inequality of
    the chain; all three quantities and both slacks travel in ``extras``.
    At p = 1 the chain collapses to equalities and is checked as one.
    """
    p = order.p
    member_powers, middle = _psd_pth_powers(f, p)
    upper = math.fsum(member_powers)
    lower = coefficient * upper
    extras = dict(extras)
    extras.update({"lower": lower, "middle": middle, "upper": upper})

    if degenerate or all(frobenius_array(m.data) == 0.0 for m in f):
        extras.update({"slack_lower": 0.0, "slack_upper": 0.0})
        return build_check(
            claim, p, f.n, f.shape, middle, lower, "geq", policy,
            degenerate=True, extras=extras,
        )

    if p == 1.0:
        dev_lower = abs(middle - lower)
        dev_upper = abs(upper - middle)
        extras.update({"slack_lower": -dev_lower, "slack_upper": -dev_upper})
        other = lower if dev_lower >= dev_upper else upper
        return build_check(
            claim, p, f.n, f.shape, middle, other, "eq", policy, extras=extras
        )

    if p < 1.0:
        slack_lower = middle - lower
        slack_upper = upper - middle
        pairs = ((middle, lower), (upper, middle))
    else:
        slack_lower = lower - middle
        slack_upper = middle - upper
        pairs = ((lower, middle), (middle, upper))
    extras.update({"slack_lower": slack_lower, "slack_upper": slack_upper})
    lhs, rhs = pairs[0] if slack_lower <= slack_upper else pairs[1]
    return build_check(claim, p, f.n, f.shape, lhs, rhs, "geq", policy, extras=extras)


def lemma_a_bounds(
    f: OperatorFamily,
    p: "SchattenOrder | float",
    policy: TolerancePolicy | None = None,
) -> CheckResult:
    """Two-sided bound on ||sum a_i||_p^p for positive members.

    n^(p-1) * sum ||a_i||_p^p <= ||sum a_i||_p^p <= sum ||a_i||_p^p holds for
    0 < p <= 1 and reverses for p >= 1; at p = 1 all three quantities are the
    trace of the sum.
    """
    order = as_order(p)
    coeff = float(f.n) ** (order.p - 1.0)
    return _chain_check(
        "lemmaA", f, order, coeff, policy, {"coefficient": coeff},
        degenerate=False,
    )


def refined_lemma_bounds(
    f: OperatorFamily,
    p: "SchattenOrder | float",
    epsilon_zero: float = DEFAULT_EPSILON_ZERO,
    policy: TolerancePolicy | None = None,
) -> CheckResult:
    """The chain of lemma_a_bounds with the nonzero count D replacing n.

    Since D <= n and the exponent p-1 is nonpositive for p <= 1, the refined
    lower coefficient D^(p-1) is never weaker than n^(p-1). A family with
    D = 0 is all zeros: every quantity vanishes and the check is reported as
    degenerate rather than evaluating 0 to a negative power.
    """
    order = as_order(p)
    d = d_constant(f, epsilon_zero)
    extras: dict = {"d_count": d.count, "epsilon_zero": epsilon_zero}
    if d.count == 0:
        return _chain_check(
            "lemmaA_refined", f, order, 0.0, policy, extras, degenerate=True
        )
    coeff = float(d.count) ** (order.p - 1.0)
    extras["coefficient"] = coeff
    return _chain_check(
        "lemmaA_refined", f, order, coeff, policy, extras, degenerate=False
    )
