"""Embedded closed-form example corpus and eigensolver health suite.

Every operation ships with concrete worked examples (trivial identities,
closed-form spectra, hand-evaluated scalar instances). ``run_selftest``
executes them all plus a randomized eigensolver residual suite, printing one
pass/fail line per example; the CLI exposes it as the ``selftest``
subcommand. The corpus is deliberately sensitive: breaking any norm,
identity or evaluator makes at least one entry fail.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import harness
from .errors import PositivityError, RankDeficiencyError, ValidationError
from .generators import (
    GeneratorSpec,
    generate,
    generate_pair_equal_sums,
    random_unitary,
)
from .inequalities import (
    ThreeFamilyInstance,
    eval_cor23,
    eval_cor24,
    eval_equality_13,
    eval_prop22,
    eval_prop25,
    eval_theorem21,
    remark_constants,
    sandwich,
)
from .matrix_core import (
    ComplexMatrix,
    OperatorFamily,
    add,
    adjoint,
    family_sum,
    frobenius,
    gram,
    mul,
    sub,
)
from .parallelogram import (
    d_constant,
    d_constant_grid,
    lemma_a_bounds,
    operator_identity_residual,
    refined_lemma_bounds,
)
from .spectral import (
    hermitian_eigen,
    schatten_norm,
    schatten_pth_power,
    singular_values,
    verify_power_identity,
)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


def _close(actual: float, expected: float, tol: float = 1e-12) -> None:
    if not abs(actual - expected) <= tol * max(1.0, abs(expected)):
        raise AssertionError(f"got {actual!r}, expected {expected!r} (tol {tol})")


def _same_matrix(m: ComplexMatrix, rows, tol: float = 0.0) -> None:
    want = np.asarray(rows, dtype=np.complex128)
    dev = float(np.max(np.abs(m.data - want))) if want.size else 0.0
    if dev > tol:
        raise AssertionError(f"matrices differ by {dev!r} (tol {tol})")


def _is(condition: bool, detail: str) -> None:
    if not condition:
        raise AssertionError(detail)


def _mat(rows) -> ComplexMatrix:
    return ComplexMatrix.from_rows(rows)


def _scalars(*values: complex) -> OperatorFamily:
    return OperatorFamily([ComplexMatrix(1, 1, [v]) for v in values])


def _gin(seed: int, n: int = 3, d: int = 3, kind: str = "ginibre") -> OperatorFamily:
    return generate(GeneratorSpec(kind, n=n, rows=d, cols=d, seed=seed))


def _rel_gap(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def _examples() -> list[tuple[str, Callable[[], None]]]:
    ex: list[tuple[str, Callable[[], None]]] = []

    def case(name: str):
        def wrap(fn):
            ex.append((name, fn))
            return fn

        return wrap

    # ---------------- matrix core ----------------
    eye2 = ComplexMatrix.identity(2)
    zero2 = ComplexMatrix.zeros(2, 2)

    @case("add/additive-identity")
    def _():
        _same_matrix(add(eye2, zero2), [[1, 0], [0, 1]])

    @case("add/additive-inverse")
    def _():
        m = _mat([[1, 2], [3, 4]])
        _same_matrix(add(m, -m), [[0, 0], [0, 0]])

    @case("add/disjoint-support")
    def _():
        _same_matrix(
            add(_mat([[1j, 0], [0, 0]]), _mat([[0, 0], [0, 1j]])),
            [[1j, 0], [0, 1j]],
        )

    @case("sub/self-difference")
    def _():
        m = _mat([[2, 1j], [0, 5]])
        _same_matrix(sub(m, m), [[0, 0], [0, 0]])

    @case("sub/zero-subtrahend")
    def _():
        m = _mat([[2, 1j], [0, 5]])
        _is(sub(m, zero2) == m, "A - 0 must equal A")

    @case("sub/diagonal-arithmetic")
    def _():
        _same_matrix(
            sub(_mat([[2, 0], [0, 2]]), eye2), [[1, 0], [0, 1]]
        )

    @case("adjoint/1x1-conjugation")
    def _():
        _same_matrix(adjoint(ComplexMatrix(1, 1, [1j])), [[-1j]])

    @case("adjoint/real-symmetric-fixed")
    def _():
        m = _mat([[1, 2], [2, 5]])
        _is(adjoint(m) == m, "real symmetric matrix must be self-adjoint")

    @case("adjoint/involution")
    def _():
        m = _mat([[1 + 2j, 3], [4j, 5 - 1j], [0, 2]])
        _is(adjoint(adjoint(m)) == m, "adjoint must be an involution")

    @case("mul/identity")
    def _():
        m = _mat([[1 + 1j, 2], [3, 4]])
        _is(mul(eye2, m) == m, "I @ A must equal A")

    @case("mul/nilpotent-square")
    def _():
        m = _mat([[0, 1], [0, 0]])
        _same_matrix(mul(m, m), [[0, 0], [0, 0]])

    @case("mul/rank1-square")
    def _():
        m = _mat([[1, 1], [1, 1]])
        _same_matrix(mul(m, m), [[2, 2], [2, 2]])

    @case("gram/unitary-gives-identity")
    def _():
        u = ComplexMatrix.from_array(
            np.array([[1, 1j], [1j, 1]], dtype=np.complex128) / SQRT2
        )
        _same_matrix(gram(u), np.eye(2), tol=1e-15)

    @case("gram/diagonal-squares")
    def _():
        _same_matrix(gram(_mat([[3, 0], [0, 4]])), [[9, 0], [0, 16]])

    @case("gram/zero")
    def _():
        _same_matrix(gram(zero2), [[0, 0], [0, 0]])

    @case("family-sum/negation-cancels")
    def _():
        m = _mat([[1 + 1j, 2], [0, 3]])
        _same_matrix(family_sum(OperatorFamily([m, -m])), [[0, 0], [0, 0]])

    @case("family-sum/zeros")
    def _():
        _same_matrix(family_sum(OperatorFamily([zero2] * 3)), [[0, 0], [0, 0]])

    @case("family-sum/three-identities")
    def _():
        _same_matrix(family_sum(OperatorFamily([eye2] * 3)), [[3, 0], [0, 3]])

    @case("frobenius/3-4-5")
    def _():
        _close(frobenius(_mat([[3, 4]])), 5.0)

    @case("frobenius/zero")
    def _():
        _close(frobenius(zero2), 0.0)

    @case("frobenius/identity-sqrt-dim")
    def _():
        _close(frobenius(ComplexMatrix.identity(7)), math.sqrt(7.0))

    # ---------------- spectral ----------------
    @case("eigen/2x2-closed-form")
    def _():
        vals, v = hermitian_eigen(_mat([[2, 1j], [-1j, 2]]))
        _close(vals[0], 3.0)
        _close(vals[1], 1.0)
        res = np.linalg.norm(
            _mat([[2, 1j], [-1j, 2]]).data @ v.data - v.data @ np.diag(vals)
        )
        _is(res <= 1e-12, f"eigen residual {res}")

    @case("eigen/diagonal-sorted")
    def _():
        vals, _v = hermitian_eigen(_mat([[5, 0, 0], [0, 1, 0], [0, 0, 3]]))
        _is(vals == [5.0, 3.0, 1.0], f"got {vals}")

    @case("eigen/zero-matrix")
    def _():
        vals, v = hermitian_eigen(ComplexMatrix.zeros(3, 3))
        _is(vals == [0.0, 0.0, 0.0], f"got {vals}")
        _same_matrix(v, np.eye(3))

    @case("singular/diagonal-moduli")
    def _():
        _is(
            singular_values(_mat([[3, 0], [0, 4]])).values == (4.0, 3.0),
            "diag(3,4) must have singular values (4, 3)",
        )

    @case("singular/rank1-ones")
    def _():
        s = singular_values(_mat([[1, 1], [1, 1]])).values
        _close(s[0], 2.0)
        _close(s[1], 0.0)

    @case("singular/unitary-all-ones")
    def _():
        s = singular_values(random_unitary(4, 11)).values
        for v in s:
            _close(v, 1.0, 1e-12)

    @case("schatten/p1-sum")
    def _():
        _close(schatten_norm(_mat([[3, 0], [0, 4]]), 1), 7.0)

    @case("schatten/p2-hypotenuse")
    def _():
        _close(schatten_norm(_mat([[3, 0], [0, 4]]), 2), 5.0)

    @case("schatten/p-half-closed-form")
    def _():
        _close(
            schatten_norm(_mat([[3, 0], [0, 4]]), 0.5),
            (SQRT3 + 2.0) ** 2,
        )

    @case("pth-power/p2-sum-of-squares")
    def _():
        _close(schatten_pth_power(_mat([[3, 0], [0, 4]]), 2), 25.0)

    @case("pth-power/zero")
    def _():
        _close(schatten_pth_power(ComplexMatrix.zeros(2, 3), 0.75), 0.0)

    @case("pth-power/rank1-sqrt2")
    def _():
        _close(schatten_pth_power(_mat([[1, 1], [1, 1]]), 0.5), SQRT2)

    @case("power-identity/diagonal-p2")
    def _():
        r = verify_power_identity(_mat([[3, 0], [0, 4]]), 2)
        _close(r.lhs, 25.0)
        _close(r.rhs, 25.0)
        _is(r.verdict == "equality", r.verdict)

    @case("power-identity/random-p1")
    def _():
        m = _gin(21, n=1, d=4)[0]
        r = verify_power_identity(m, 1)
        _is(_rel_gap(r.lhs, r.rhs) <= 1e-10, f"gap {r.lhs - r.rhs}")

    @case("power-identity/zero")
    def _():
        r = verify_power_identity(ComplexMatrix.zeros(3, 3), 0.5)
        _is(r.lhs == 0.0 and r.rhs == 0.0, "zero matrix must give 0 = 0")
        _is(r.verdict == "degenerate", r.verdict)

    # ---------------- parallelogram ----------------
    @case("d-constant/mixed-family")
    def _():
        f = OperatorFamily([eye2, zero2, _mat([[0, 1], [0, 0]])])
        _is(d_constant(f).count == 2, "expected two nonzero members")

    @case("d-constant/all-zero")
    def _():
        _is(d_constant(OperatorFamily([zero2] * 4)).count == 0, "expected 0")

    @case("d-constant/none-zero")
    def _():
        _is(d_constant(_gin(3, n=4, d=2)).count == 4, "expected 4")

    @case("d-grid/equal-constant-families")
    def _():
        x = _mat([[1, 2], [3, 4]])
        f = OperatorFamily([x, x])
        _is(d_constant_grid(f, f).count == 0, "every difference vanishes")

    @case("d-grid/zero-vs-nonzero")
    def _():
        a = _gin(5, n=3, d=2)
        b = OperatorFamily([zero2] * 3)
        _is(d_constant_grid(a, b).count == 9, "expected n^2")

    @case("d-grid/single-collision")
    def _():
        x, y, z = eye2, _mat([[0, 1], [0, 0]]), _mat([[2, 0], [0, 2]])
        _is(
            d_constant_grid(OperatorFamily([x, y]), OperatorFamily([x, z])).count
            == 3,
            "only the (1,1) difference vanishes",
        )

    @case("identity/n1-empty-sums")
    def _():
        a = OperatorFamily([_mat([[1, 2], [3, 4]])])
        b = OperatorFamily([_mat([[0, 1], [1, 0]])])
        _close(operator_identity_residual(a, b), 0.0, 1e-13)

    @case("identity/scalar-expansion")
    def _():
        _close(operator_identity_residual(_scalars(1, 2), _scalars(0, 0)), 0.0, 1e-13)

    @case("identity/random-5x5")
    def _():
        a, b = _gin(31, n=3, d=5), _gin(32, n=3, d=5)
        mass = 1.0 + sum(
            frobenius(sub(ai, bj)) ** 2 for ai in a for bj in b
        )
        _is(
            operator_identity_residual(a, b) <= 1e-10 * mass,
            "identity residual above roundoff budget",
        )

    @case("lemma/n1-all-equal")
    def _():
        f = generate(GeneratorSpec("psd", n=1, rows=3, cols=3, seed=41))
        r = lemma_a_bounds(f, 0.7)
        _close(r.extras["slack_lower"], 0.0, 1e-12)
        _close(r.extras["slack_upper"], 0.0, 1e-12)

    @case("lemma/scalar-pair-half")
    def _():
        r = lemma_a_bounds(_scalars(1, 1), 0.5)
        _close(r.extras["lower"], SQRT2)
        _close(r.extras["middle"], SQRT2)
        _close(r.extras["upper"], 2.0)
        _is(r.ok, r.verdict)

    @case("lemma/disjoint-blocks-tight-upper")
    def _():
        a1 = _mat([[2, 0], [0, 0]])
        a2 = _mat([[0, 0], [0, 5]])
        r = lemma_a_bounds(OperatorFamily([a1, a2]), 0.5)
        _close(r.extras["middle"], r.extras["upper"], 1e-12)

    @case("refined/single-nonzero-all-tight")
    def _():
        f = OperatorFamily([ComplexMatrix.identity(3), ComplexMatrix.zeros(3, 3),
                            ComplexMatrix.zeros(3, 3)])
        r = refined_lemma_bounds(f, 0.5)
        _is(r.extras["d_count"] == 1, "D must be 1")
        _close(r.extras["lower"], r.extras["middle"], 1e-12)
        _close(r.extras["middle"], r.extras["upper"], 1e-12)

    @case("refined/all-zero-degenerate")
    def _():
        r = refined_lemma_bounds(OperatorFamily([zero2, zero2]), 0.5)
        _is(r.verdict == "degenerate", r.verdict)

    @case("refined/beats-plain-with-zero-member")
    def _():
        f = OperatorFamily(
            [generate(GeneratorSpec("psd", n=1, rows=2, cols=2, seed=8))[0], zero2]
        )
        plain = lemma_a_bounds(f, 0.5)
        refined = refined_lemma_bounds(f, 0.5)
        _is(
            refined.extras["lower"] >= plain.extras["lower"],
            "refined lower bound must not be weaker",
        )
        _is(
            refined.extras["coefficient"] == 1.0
            and plain.extras["coefficient"] == 2.0 ** (-0.5),
            "coefficients 1 vs 2^(-1/2) expected",
        )

    # ---------------- inequalities ----------------
    @case("eq13/equal-families")
    def _():
        a = _gin(51, n=3, d=2)
        r = eval_equality_13(a, a)
        _is(r.verdict == "equality", r.verdict)

    @case("eq13/n1-zero-both-sides")
    def _():
        r = eval_equality_13(_scalars(3 + 1j), _scalars(1))
        _is(r.lhs == 0.0 and r.rhs == 0.0, f"{r.lhs}, {r.rhs}")

    @case("eq13/random-identity")
    def _():
        r = eval_equality_13(_gin(52, n=3, d=4), _gin(53, n=3, d=4))
        _is(_rel_gap(r.lhs, r.rhs) <= 1e-9, f"gap {r.lhs - r.rhs}")

    @case("thm21/equal-triple-p1")
    def _():
        f = _gin(54, n=3, d=2)
        r = eval_theorem21(ThreeFamilyInstance(f, f, f), 1)
        _is(r.ok and r.slack >= 0.0, f"{r.verdict}, slack {r.slack}")

    @case("thm21/all-zero-degenerate")
    def _():
        z = OperatorFamily([zero2, zero2])
        r = eval_theorem21(ThreeFamilyInstance(z, z, z), 0.5)
        _is(r.verdict == "degenerate", r.verdict)

    @case("thm21/p2-collapse-matches-eq13")
    def _():
        a, b, c = _gin(55, 2, 3), _gin(56, 2, 3), _gin(57, 2, 3)
        r = eval_theorem21(ThreeFamilyInstance(a, b, c), 2)
        _is(abs(r.slack) <= 1e-9 * max(1.0, r.lhs, r.rhs), f"slack {r.slack}")
        cyc = sum(eval_equality_13(x, y).lhs for x, y in ((a, b), (b, c), (c, a)))
        _close(r.lhs, cyc / 2.0, 1e-12)

    @case("prop22/p2-collapse")
    def _():
        r = eval_prop22(_gin(58, 3, 3), _gin(59, 3, 3), 2)
        _is(abs(r.slack) <= 1e-9 * max(1.0, r.lhs, r.rhs), f"slack {r.slack}")

    @case("prop22/n1-equality")
    def _():
        r = eval_prop22(_scalars(2 + 1j), _scalars(1), 0.7)
        _close(r.lhs, 0.0)
        _close(r.rhs, 0.0)

    @case("prop22/hand-scalars")
    def _():
        r = eval_prop22(_scalars(1, -1), _scalars(0, 0), 1)
        _close(r.lhs, 4.0)
        _close(r.rhs, 4.0)
        _is(r.verdict == "equality", r.verdict)

    @case("cor23/permutation")
    def _():
        a = _gin(60, n=3, d=2)
        b = OperatorFamily([a[2], a[0], a[1]])
        r = eval_cor23(a, b, 1)
        _is(r.ok, r.verdict)

    @case("cor23/same-family")
    def _():
        a = _gin(61, n=3, d=2)
        r = eval_cor23(a, a, 1)
        _is(r.ok and r.slack >= -1e-12, f"{r.verdict}, {r.slack}")

    @case("cor23/p2-equality")
    def _():
        a, b = generate_pair_equal_sums(
            GeneratorSpec("pair_equal_sums", n=3, rows=2, cols=2, seed=62)
        )
        r = eval_cor23(a, b, 2)
        _is(abs(r.slack) <= 1e-9 * max(1.0, r.lhs, r.rhs), f"slack {r.slack}")

    @case("cor24/plus-minus-p2")
    def _():
        m = _gin(63, n=1, d=2)[0]
        r = eval_cor24(OperatorFamily([m, -m]), 2)
        _close(r.lhs, 8.0 * schatten_norm(m, 2) ** 2, 1e-10)
        _is(r.verdict == "equality", r.verdict)

    @case("cor24/plus-minus-p1")
    def _():
        m = _gin(64, n=1, d=2)[0]
        r = eval_cor24(OperatorFamily([m, -m]), 1)
        _close(r.lhs, 4.0 * schatten_norm(m, 1), 1e-10)
        _close(r.rhs, r.lhs, 1e-10)

    @case("cor24/all-zero-degenerate")
    def _():
        r = eval_cor24(OperatorFamily([zero2, zero2]), 1)
        _is(r.verdict == "degenerate", r.verdict)

    @case("prop25/p2-collapse")
    def _():
        r = eval_prop25(_gin(65, 3, 3), _gin(66, 3, 3), 2)
        _is(abs(r.slack) <= 1e-9 * max(1.0, r.lhs, r.rhs), f"slack {r.slack}")

    @case("prop25/n1-equality")
    def _():
        r = eval_prop25(_scalars(2), _scalars(1j), 0.5)
        _close(r.lhs, 0.0)
        _close(r.rhs, 0.0)

    @case("prop25/hand-scalars-8sqrt3")
    def _():
        r = eval_prop25(_scalars(1, -1), _scalars(0, 0), 1)
        _close(r.lhs, 8.0 * SQRT3)
        _close(r.rhs, 4.0)
        _is(r.verdict == "holds", r.verdict)

    @case("sandwich/p2-both-vanish")
    def _():
        lo, hi = sandwich(_gin(67, 2, 2), _gin(68, 2, 2), 2)
        for r in (lo, hi):
            _is(abs(r.slack) <= 1e-9 * max(1.0, r.lhs, r.rhs), f"slack {r.slack}")

    @case("sandwich/p1-both-hold")
    def _():
        for r in sandwich(_gin(69, 2, 2), _gin(70, 2, 2), 1):
            _is(r.ok, r.verdict)

    @case("sandwich/p3-both-hold-reversed")
    def _():
        for r in sandwich(_gin(71, 2, 2), _gin(72, 2, 2), 3):
            _is(r.ok and r.direction == "leq", f"{r.verdict}, {r.direction}")

    @case("remark/n1-boundary")
    def _():
        _is(
            remark_constants(1, 1, "paper_2n2").verdict == "violated",
            "printed constant fails the right inequality at n=1",
        )
        _is(
            remark_constants(1, 1, "consistent_n2").verdict == "degenerate",
            "consistent variant degenerates to 1 < 1 at n=1",
        )

    @case("remark/n3-p1-consistent-holds")
    def _():
        r = remark_constants(3, 1, "consistent_n2")
        _close(r.extras["middle"], math.sqrt(7.0))
        _is(r.verdict == "holds", r.verdict)

    @case("remark/n3-p1-paper-fails")
    def _():
        r = remark_constants(3, 1, "paper_2n2")
        _close(r.extras["middle"], 4.0)
        _is(r.verdict == "violated", r.verdict)

    # ---------------- generators ----------------
    @case("generate/deterministic")
    def _():
        spec = GeneratorSpec("scalar", n=2, rows=1, cols=1, seed=7)
        f1, f2 = generate(spec), generate(spec)
        _is(f1 == f2, "equal specs must generate bit-identical families")

    @case("generate/mean-centered-residual")
    def _():
        f = generate(GeneratorSpec("mean_centered", n=4, rows=3, cols=3, seed=9))
        _is(
            frobenius(family_sum(f)) <= 1e-13,
            "centered family must sum to roundoff zero",
        )

    @case("generate/with-zeros-d-count")
    def _():
        f = generate(GeneratorSpec("with_zeros", n=5, rows=2, cols=2, seed=10, zeros=2))
        _is(d_constant(f).count == 3, "expected D = n - k = 3")

    @case("pair/equal-sums-residual")
    def _():
        a, b = generate_pair_equal_sums(
            GeneratorSpec("pair_equal_sums", n=4, rows=2, cols=2, seed=12)
        )
        _is(
            frobenius(sub(family_sum(a), family_sum(b))) <= 1e-13,
            "pair sums must match to roundoff",
        )

    @case("pair/n1-copies-exactly")
    def _():
        a, b = generate_pair_equal_sums(
            GeneratorSpec("pair_equal_sums", n=1, rows=2, cols=2, seed=13)
        )
        _is(a[0] == b[0], "n=1 constraint forces b_1 == a_1 exactly")

    @case("pair/deterministic")
    def _():
        spec = GeneratorSpec("pair_equal_sums", n=2, rows=2, cols=2, seed=14)
        _is(
            generate_pair_equal_sums(spec) == generate_pair_equal_sums(spec),
            "equal specs must generate identical pairs",
        )

    @case("unitary/dim1-phase")
    def _():
        u = random_unitary(1, 15)
        _close(abs(u.data[0, 0]), 1.0, 1e-14)

    @case("unitary/residual-bound")
    def _():
        u = random_unitary(5, 16)
        res = float(np.linalg.norm(u.data.conj().T @ u.data - np.eye(5)))
        _is(res <= 1e-12 * 5, f"unitarity residual {res}")

    @case("unitary/seeds-differ")
    def _():
        d = float(
            np.linalg.norm(random_unitary(3, 1).data - random_unitary(3, 2).data)
        )
        _is(d > 0.0, "different seeds must give different unitaries")

    # ---------------- harness ----------------
    @case("sweep/eq13-all-equalities")
    def _():
        plan = harness.SweepPlan(
            claims=("eq13",),
            p_grid=(2.0,),
            n_grid=(1, 2),
            dim_grid=((2, 2),),
            trials_per_cell=25,
            generator=GeneratorSpec("ginibre", n=1, rows=1, cols=1),
            base_seed=101,
        )
        report = harness.run_sweep(plan)
        for cell in report.cells:
            _is(
                cell.equality_count == cell.trials,
                f"cell {cell.claim} n={cell.n}: {cell.verdicts}",
            )

    @case("sweep/thm21-proven-regime")
    def _():
        plan = harness.SweepPlan(
            claims=("thm21",),
            p_grid=(0.5, 1.0, 2.0),
            n_grid=(2,),
            dim_grid=((2, 2),),
            trials_per_cell=10,
            generator=GeneratorSpec("ginibre", n=1, rows=1, cols=1),
            base_seed=102,
        )
        report = harness.run_sweep(plan)
        _is(report.violations == 0, f"violations: {report.summary}")

    @case("sweep/zero-trials-rejected")
    def _():
        try:
            harness.SweepPlan(
                claims=("eq13",),
                p_grid=(2.0,),
                n_grid=(1,),
                dim_grid=((1, 1),),
                trials_per_cell=0,
                generator=GeneratorSpec("ginibre", n=1, rows=1, cols=1),
            )
        except ValidationError:
            return
        raise AssertionError("trials_per_cell=0 must be rejected")

    @case("probe/n1-exact-zero")
    def _():
        r = harness.probe_spectral_norm_identity(_scalars(2 + 1j), _scalars(1j))
        _close(r.extras["discrepancy"], 0.0, 1e-13)

    @case("probe/dominant-coordinate-diagonal")
    def _():
        def diag_fam(vals):
            return OperatorFamily(
                [_mat([[v, 0], [0, 0.1 * v]]) for v in vals]
            )

        r = harness.probe_spectral_norm_identity(
            diag_fam([1.0, 2.5, -0.75]), diag_fam([0.5, -1.5, 2.0])
        )
        _is(
            r.extras["discrepancy"] <= 1e-9 * max(1.0, r.lhs, abs(r.rhs)),
            f"discrepancy {r.extras['discrepancy']}",
        )

    @case("probe/random-measures-without-asserting")
    def _():
        r = harness.probe_spectral_norm_identity(_gin(75, 2, 2), _gin(76, 2, 2))
        _is(math.isfinite(r.extras["discrepancy"]), "discrepancy must be finite")

    @case("fit/k2-recovers-two-minus-two")
    def _():
        fit = harness.fit_kset_ansatz(
            2, GeneratorSpec("ginibre", n=2, rows=2, cols=2, seed=77), 48
        )
        _close(fit.alpha, 2.0, 1e-6)
        _close(fit.beta, -2.0, 1e-6)
        _is(fit.residual_rms <= 1e-8 * fit.scale, f"residual {fit.residual_rms}")

    @case("fit/k3-exact-candidate")
    def _():
        fit = harness.fit_kset_ansatz(
            3, GeneratorSpec("ginibre", n=2, rows=2, cols=2, seed=78), 48
        )
        _is(fit.exact_candidate, f"residual {fit.residual_rms} vs scale {fit.scale}")

    @case("fit/too-few-instances")
    def _():
        try:
            harness.fit_kset_ansatz(
                2, GeneratorSpec("ginibre", n=1, rows=1, cols=1, seed=1), 2
            )
        except (ValidationError, RankDeficiencyError):
            return
        raise AssertionError("instances < 3 must be rejected")

    @case("search/cor24-equality-attained")
    def _():
        res = harness.tightness_search("cor24", 1.0, 2, (1, 1), 800, 7)
        _is(
            res.best_slack <= 1e-7 * res.scale,
            f"best slack {res.best_slack} vs scale {res.scale}",
        )

    @case("search/prop22-p2-immediate-identity")
    def _():
        res = harness.tightness_search("prop22", 2.0, 2, (1, 1), 150, 8)
        _is(abs(res.best_slack) <= 1e-9 * res.scale, f"best slack {res.best_slack}")

    @case("search/prop22-p1-no-violation-found")
    def _():
        res = harness.tightness_search("prop22", 1.0, 2, (1, 1), 5000, 9)
        _is(
            res.best_slack >= -1e-9 * res.scale,
            f"claimed violation: {res.best_slack}",
        )

    # ---------------- eigensolver health ----------------
    @case("eigen-suite/random-residuals")
    def _():
        for k, d in enumerate([2, 3, 4, 5, 6, 8, 10, 12] * 5):
            h = generate(GeneratorSpec("hermitian", n=1, rows=d, cols=d, seed=900 + k))[0]
            vals, v = hermitian_eigen(h)
            hnorm = frobenius(h)
            res = float(np.linalg.norm(h.data @ v.data - v.data @ np.diag(vals)))
            unit = float(np.linalg.norm(v.data.conj().T @ v.data - np.eye(d)))
            _is(res <= 1e-12 * max(1.0, hnorm), f"d={d} residual {res}")
            _is(unit <= 1e-12 * d, f"d={d} unitarity {unit}")

    @case("eigen-suite/bordered-diagonal-closed-form")
    def _():
        # diag(4, 9, 1) with a single coupling c between coordinates 0 and 2:
        # the untouched eigenvalue stays, the coupled 2x2 block is closed form.
        c = 2.0
        h = _mat([[4, 0, c], [0, 9, 0], [c, 0, 1]])
        tr, det = 5.0, 4.0 * 1.0 - c * c
        lo = (tr - math.sqrt(tr * tr - 4.0 * det)) / 2.0
        hi = (tr + math.sqrt(tr * tr - 4.0 * det)) / 2.0
        want = sorted([9.0, hi, lo], reverse=True)
        got, _v = hermitian_eigen(h)
        for g, w in zip(got, want):
            _close(g, w, 1e-12)
        s = singular_values(h).values
        for g, w in zip(s, sorted(abs(x) for x in want)[::-1]):
            _close(g, w, 1e-12)

    @case("eigen-suite/psd-check-names-offender")
    def _():
        f = OperatorFamily([ComplexMatrix.identity(2), _mat([[1, 0], [0, -1]])])
        try:
            lemma_a_bounds(f, 0.5)
        except PositivityError as exc:
            _is(exc.index == 1, f"offender index {exc.index}")
            _close(exc.min_eigenvalue, -1.0, 1e-9)
            return
        raise AssertionError("indefinite member must be rejected")

    return ex


def run_selftest(write=print) -> int:
    """Run the whole corpus; print one line per example; return failure count."""
    failures = 0
    examples = _examples()
    for name, fn in examples:
        try:
            fn()
        except AssertionError as exc:
            failures += 1
            write(f"FAIL {name}: {exc}")
        except Exception as exc:  # defensive: corpus must never crash the runner
            failures += 1
            write(f"FAIL {name}: unexpected {type(exc).__name__}: {exc}")
        else:
            write(f"ok   {name}")
    write(f"{len(examples) - failures}/{len(examples)} examples passed")
    return failures
