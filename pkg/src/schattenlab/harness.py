"""Batch verification engine.

``run_sweep`` executes the claim evaluators over a (claim, p, n, dim) grid
with per-trial derived seeds, aggregates slack statistics, and applies the
violation protocol: a trial may be classified as violated only if a recheck
with the eigensolver convergence threshold tightened 100x still shows slack
beyond tolerance, and every confirmed violation is persisted as a witness
file that can be re-run independently.

The module also hosts the exploratory operations that assert nothing:
``probe_spectral_norm_identity`` measures how the two-family parallelogram
expression behaves under the operator (largest-singular-value) norm, where
it is not an identity, and ``fit_kset_ansatz`` regresses the k-family
generalization of the 2-norm identity from random instances.
``tightness_search`` minimizes signed slack with a budgeted multi-start
Nelder-Mead descent to probe how sharp the constants are.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ._version import __version__
from .errors import (
    RankDeficiencyError,
    SchattenLabError,
    ValidationError,
)
from .generators import (
    GeneratorSpec,
    SplitMix64,
    generate,
    generate_pair_equal_sums,
    mix_seed,
)
from .inequalities import (
    ThreeFamilyInstance,
    _grid_hs_sq,
    _hs_sq,
    _sum_diff,
    eval_cor23,
    eval_cor24,
    eval_equality_13,
    eval_prop22,
    eval_prop25,
    eval_theorem21,
    remark_constants,
)
from .matrix_core import OperatorFamily, frobenius_array
from .parallelogram import (
    DEFAULT_EPSILON_ZERO,
    lemma_a_bounds,
    operator_identity_residual,
    refined_lemma_bounds,
)
from .results import (
    CLAIM_IDS,
    CheckResult,
    TolerancePolicy,
    build_check,
)
from .spectral import (
    _singular_values_array,
    eigensolver_tolerance,
    verify_power_identity,
)

#: Eigensolver threshold scale applied when rechecking a suspected violation.
RECHECK_TOL_SCALE = 0.01

#: Residual tolerance factor of the exact operator identity, relative to
#: 1 + the total squared cross-difference mass of the instance.
IDENTITY_RTOL = 1e-10

#: A fitted k-family relation counts as an exact candidate below this
#: residual, relative to the target's RMS.
EXACT_CANDIDATE_RTOL = 1e-8

_ENV_THREADS = "SCHATTEN_LAB_THREADS"

#: Families each claim consumes (remark_i is family-free).
CLAIM_ARITY = {
    "eq13": 2,
    "thm21": 3,
    "prop22": 2,
    "cor23": 2,
    "cor24": 1,
    "prop25": 2,
    "lemmaA": 1,
    "lemmaA_refined": 1,
    "power_id": 1,
    "identity14": 2,
    "eq12_probe": 2,
    "remark_i": 0,
}

#: Claims whose instances must come from a specific generator kind.
_CLAIM_KIND = {
    "lemmaA": "psd",
    "lemmaA_refined": "psd",
    "cor24": "mean_centered",
    "cor23": "pair_equal_sums",
}


def identity_14_check(
    a: OperatorFamily,
    b: OperatorFamily,
    policy: TolerancePolicy | None = None,
) -> CheckResult:
    """Exact operator identity as a CheckResult.

    lhs is the Frobenius residual of the matrix identity, rhs is 0, and the
    tolerance embeds the instance mass: residual must stay below
    IDENTITY_RTOL * (1 + sum_{i,j} ||a_i - b_j||_F^2).
    """
    residual = operator_identity_residual(a, b)
    mass = 1.0 + math.fsum(
        frobenius_array(ai.data - bj.data) ** 2 for ai in a for bj in b
    )
    degenerate = all(
        frobenius_array(m.data) == 0.0 for f in (a, b) for m in f
    )
    return build_check(
        "identity14", 2.0, a.n, a.shape, residual, 0.0, "eq", policy,
        degenerate=degenerate,
        abs_tol_override=IDENTITY_RTOL * mass,
        extras={"mass": mass},
    )


def _spectral_norm(arr: np.ndarray) -> float:
    values = _singular_values_array(arr)
    return values[0] if values else 0.0


def probe_spectral_norm_identity(
    a: OperatorFamily,
    b: OperatorFamily,
    policy: TolerancePolicy | None = None,
) -> CheckResult:
    """Measure the two-family parallelogram expression under the operator norm.

    The subscript-free reading of the 2-norm identity replaces every norm by
    the largest singular value. Read that way it is false in general; this
    operation asserts nothing and simply reports both sides. Its result is
    quarantined from verdict statistics by the sweep engine, and the p field
    is recorded as 0 to flag that no Schatten exponent is involved.
    """
    from .parallelogram import _require_pair

    _require_pair(a, b)
    lhs = 0.0
    for fam in (a, b):
        for mi in fam:
            for mj in fam:
                lhs += _spectral_norm(mi.data - mj.data) ** 2
    cross = 0.0
    for ai in a:
        for bj in b:
            cross += _spectral_norm(ai.data - bj.data) ** 2
    rhs = 2.0 * cross - 2.0 * _spectral_norm(_sum_diff(a, b)) ** 2
    return build_check(
        "eq12_probe", 0.0, a.n, a.shape, lhs, rhs, "eq", policy,
        degenerate=all(
            frobenius_array(m.data) == 0.0 for f in (a, b) for m in f
        ),
        extras={"norm": "operator", "discrepancy": abs(lhs - rhs)},
    )


def evaluate_claim(
    claim: str,
    families: list[OperatorFamily],
    p: float,
    *,
    n: int | None = None,
    policy: TolerancePolicy | None = None,
    epsilon_zero: float = DEFAULT_EPSILON_ZERO,
    variant: str | None = None,
) -> CheckResult:
    """Dispatch one claim evaluation on concrete families.

    ``n`` and ``variant`` are only consulted by the family-free remark_i
    claim; every other claim takes its size from the families.
    """
    if claim not in CLAIM_ARITY:
        raise ValidationError(f"unknown claim id {claim!r}")
    arity = CLAIM_ARITY[claim]
    if len(families) != arity:
        raise ValidationError(
            f"claim {claim!r} takes {arity} families, got {len(families)}"
        )
    if claim == "eq13":
        return eval_equality_13(families[0], families[1], policy)
    if claim == "thm21":
        return eval_theorem21(
            ThreeFamilyInstance(*families), p, epsilon_zero, policy
        )
    if claim == "prop22":
        return eval_prop22(families[0], families[1], p, policy)
    if claim == "cor23":
        return eval_cor23(families[0], families[1], p, policy)
    if claim == "cor24":
        return eval_cor24(families[0], p, policy)
    if claim == "prop25":
        return eval_prop25(families[0], families[1], p, policy)
    if claim == "lemmaA":
        return lemma_a_bounds(families[0], p, policy)
    if claim == "lemmaA_refined":
        return refined_lemma_bounds(families[0], p, epsilon_zero, policy)
    if claim == "power_id":
        return verify_power_identity(families[0][0], p, policy)
    if claim == "identity14":
        return identity_14_check(families[0], families[1], policy)
    if claim == "eq12_probe":
        return probe_spectral_norm_identity(families[0], families[1], policy)
    if claim == "remark_i":
        if n is None:
            raise ValidationError("remark_i needs an explicit n")
        return remark_constants(n, p, variant or "consistent_n2", policy)
    raise ValidationError(f"claim {claim!r} not dispatchable")


def instantiate_families(
    claim: str,
    n: int,
    dim: tuple[int, int],
    template: GeneratorSpec,
    seed: int,
) -> list[OperatorFamily]:
    """Build the random families one trial of a claim consumes.

    The plan's generator acts as a template for kind, scale and structural
    zeros; claims with structural requirements override the kind (psd for
    the positive-member chains, mean-centered for the zero-sum claim, an
    equal-sums pair for the constrained corollary). The refined chain gets
    one structural zero member when n >= 2 so the refinement differs from
    the plain chain.
    """
    rows, cols = dim
    arity = CLAIM_ARITY[claim]
    if arity == 0:
        return []
    kind = _CLAIM_KIND.get(claim, template.kind)
    zeros = template.zeros
    if claim == "lemmaA_refined":
        zeros = max(zeros, 1 if n >= 2 else 0)
    if claim == "power_id":
        spec = replace(
            template, kind=kind, n=1, rows=rows, cols=cols, zeros=0,
            seed=mix_seed(seed, 0),
        )
        return [generate(spec)]
    if claim == "cor23":
        spec = replace(
            template, kind="pair_equal_sums", n=n, rows=rows, cols=cols,
            zeros=zeros, seed=mix_seed(seed, 0),
        )
        a, b = generate_pair_equal_sums(spec)
        return [a, b]
    out = []
    for fam_idx in range(arity):
        spec = replace(
            template, kind=kind, n=n, rows=rows, cols=cols, zeros=zeros,
            seed=mix_seed(seed, fam_idx),
        )
        out.append(generate(spec))
    return out


@dataclass(frozen=True)
class SweepPlan:
    """Grid of cells to execute: claims x p_grid x n_grid x dim_grid.

    remark_i cells ignore the dimension grid (recorded as 0x0) and are
    expanded into one deterministic cell per constant variant, restricted to
    its 0 < p <= 2 scope; eq12_probe cells land in the report's quarantined
    probe section.
    """

    claims: tuple[str, ...]
    p_grid: tuple[float, ...]
    n_grid: tuple[int, ...]
    dim_grid: tuple[tuple[int, int], ...]
    trials_per_cell: int
    generator: GeneratorSpec
    base_seed: int = 0
    tolerance: TolerancePolicy = TolerancePolicy()

    def __post_init__(self) -> None:
        if not self.claims:
            raise ValidationError("plan needs at least one claim")
        for c in self.claims:
            if c not in CLAIM_IDS:
                raise ValidationError(f"unknown claim id {c!r}")
        if not self.p_grid or any(
            not (isinstance(p, (int, float)) and math.isfinite(p) and p > 0)
            for p in self.p_grid
        ):
            raise ValidationError("p_grid must be non-empty with p > 0")
        if not self.n_grid or any(
            not (isinstance(n, int) and n >= 1) for n in self.n_grid
        ):
            raise ValidationError("n_grid must be non-empty with integer n >= 1")
        if not self.dim_grid or any(
            len(d) != 2 or d[0] < 1 or d[1] < 1 for d in self.dim_grid
        ):
            raise ValidationError("dim_grid must be non-empty with positive dims")
        if not (isinstance(self.trials_per_cell, int) and self.trials_per_cell >= 1):
            raise ValidationError("trials_per_cell must be an integer >= 1")
        object.__setattr__(self, "claims", tuple(self.claims))
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))
        object.__setattr__(self, "n_grid", tuple(self.n_grid))
        object.__setattr__(
            self, "dim_grid", tuple((int(r), int(c)) for r, c in self.dim_grid)
        )
        object.__setattr__(self, "base_seed", self.base_seed & 0xFFFFFFFFFFFFFFFF)

    def cells(self) -> list["_Cell"]:
        """Deterministic cell enumeration; the index keys derived seeds."""
        out: list[_Cell] = []
        index = 0
        for claim in self.claims:
            for p in self.p_grid:
                if claim == "remark_i":
                    if p > 2.0:
                        continue
                    for n in self.n_grid:
                        for variant in ("consistent_n2", "paper_2n2"):
                            out.append(
                                _Cell(index, claim, p, n, (0, 0), 1, variant)
                            )
                            index += 1
                    continue
                for n in self.n_grid:
                    for dim in self.dim_grid:
                        out.append(
                            _Cell(
                                index, claim, p, n, dim,
                                self.trials_per_cell, None,
                            )
                        )
                        index += 1
        return out

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "claims": list(self.claims),
            "p_grid": list(self.p_grid),
            "n_grid": list(self.n_grid),
            "dim_grid": [[r, c] for r, c in self.dim_grid],
            "trials_per_cell": self.trials_per_cell,
            "generator": self.generator.to_json(),
            "base_seed": self.base_seed,
            "tolerance": self.tolerance.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SweepPlan":
        if not isinstance(obj, dict):
            raise ValidationError("plan must be a JSON object")
        schema = obj.get("schema", 1)
        if schema != 1:
            raise ValidationError(f"unsupported plan schema {schema!r}")
        try:
            dims = [(int(r), int(c)) for r, c in obj.get("dim_grid", [])]
            return cls(
                claims=tuple(str(c) for c in obj.get("claims", [])),
                p_grid=tuple(float(p) for p in obj.get("p_grid", [])),
                n_grid=tuple(int(n) for n in obj.get("n_grid", [])),
                dim_grid=tuple(dims),
                trials_per_cell=int(obj.get("trials_per_cell", 1)),
                generator=GeneratorSpec.from_json(obj.get("generator", {})),
                base_seed=int(obj.get("base_seed", 0)),
                tolerance=TolerancePolicy.from_json(obj.get("tolerance", {})),
            )
        except ValidationError:
            raise
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad plan: {exc}") from exc


@dataclass(frozen=True)
class _Cell:
    index: int
    claim: str
    p: float
    n: int
    dim: tuple[int, int]
    trials: int
    variant: str | None


#: All verdict-bearing inequality/identity claims, in report order.
VERDICT_CLAIMS = (
    "thm21",
    "prop22",
    "cor23",
    "cor24",
    "prop25",
    "lemmaA",
    "lemmaA_refined",
)


def default_plan(
    trials_per_cell: int = 500,
    base_seed: int = 20260809,
    scale: float = 1.0,
) -> SweepPlan:
    """The default verification sweep: all verdict claims over the proven
    regimes (forward p <= 2, reversed p >= 2) on small sizes."""
    return SweepPlan(
        claims=VERDICT_CLAIMS,
        p_grid=(0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0),
        n_grid=(1, 2, 3),
        dim_grid=((1, 1), (2, 2), (4, 4)),
        trials_per_cell=trials_per_cell,
        generator=GeneratorSpec("ginibre", n=1, rows=1, cols=1, scale=scale),
        base_seed=base_seed,
    )


def demo_plan(trials_per_cell: int = 40, base_seed: int = 7) -> SweepPlan:
    """A light bundled plan covering every claim, used by the CLI default."""
    return SweepPlan(
        claims=VERDICT_CLAIMS + ("eq13", "power_id", "identity14", "remark_i"),
        p_grid=(0.5, 1.0, 2.0, 3.0),
        n_grid=(1, 2, 3),
        dim_grid=((1, 1), (2, 2), (4, 4)),
        trials_per_cell=trials_per_cell,
        generator=GeneratorSpec("ginibre", n=1, rows=1, cols=1),
        base_seed=base_seed,
    )


@dataclass
class CellRecord:
    claim: str
    variant: str | None
    p: float
    n: int
    rows: int
    cols: int
    trials: int
    verdicts: dict
    min_slack: float | None
    min_slack_seed: int | None
    mean_slack: float | None
    equality_count: int
    witnesses: list
    errors: list

    def to_json(self) -> dict:
        return {
            "claim": self.claim,
            "variant": self.variant,
            "p": self.p,
            "n": self.n,
            "rows": self.rows,
            "cols": self.cols,
            "trials": self.trials,
            "verdicts": dict(self.verdicts),
            "min_slack": self.min_slack,
            "min_slack_seed": self.min_slack_seed,
            "mean_slack": self.mean_slack,
            "equality_count": self.equality_count,
            "witnesses": [w["name"] for w in self.witnesses],
            "errors": list(self.errors),
        }


@dataclass
class ProbeRecord:
    claim: str
    p: float
    n: int
    rows: int
    cols: int
    trials: int
    max_abs_discrepancy: float
    mean_abs_discrepancy: float
    max_rel_discrepancy: float
    max_seed: int | None

    def to_json(self) -> dict:
        return {
            "claim": self.claim,
            "p": self.p,
            "n": self.n,
            "rows": self.rows,
            "cols": self.cols,
            "trials": self.trials,
            "max_abs_discrepancy": self.max_abs_discrepancy,
            "mean_abs_discrepancy": self.mean_abs_discrepancy,
            "max_rel_discrepancy": self.max_rel_discrepancy,
            "max_seed": self.max_seed,
        }


@dataclass
class SweepReport:
    """Aggregated sweep output with a stable JSON schema (version 1)."""

    plan: SweepPlan
    cells: list
    probes: list
    summary: dict
    version: str
    timestamp: str

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "tool": "schattenlab",
            "version": self.version,
            "timestamp": self.timestamp,
            "plan": self.plan.to_json(),
            "cells": [c.to_json() for c in self.cells],
            "probes": [r.to_json() for r in self.probes],
            "summary": dict(self.summary),
        }

    def canonical_json(self, include_timestamp: bool = True) -> str:
        """Deterministic serialization; drop the timestamp to compare runs."""
        obj = self.to_json()
        if not include_timestamp:
            obj.pop("timestamp")
        return json.dumps(obj, indent=2, sort_keys=True) + "\n"

    @property
    def violations(self) -> int:
        return self.summary["violations"]

    def to_csv(self) -> str:
        """Flat CSV of the same report; floats carry 17 significant digits."""
        cols = [
            "section", "claim", "variant", "p", "n", "rows", "cols", "trials",
            "holds", "equality", "violated", "degenerate", "error",
            "min_slack", "min_slack_seed", "mean_slack", "equality_count",
            "max_abs_discrepancy", "mean_abs_discrepancy",
            "max_rel_discrepancy", "max_seed",
        ]
        lines = [",".join(cols)]

        def fmt(x) -> str:
            if x is None:
                return ""
            if isinstance(x, float):
                return format(x, ".17g")
            return str(x)

        for c in self.cells:
            row = {
                "section": "cell",
                "claim": c.claim,
                "variant": c.variant or "",
                "p": c.p,
                "n": c.n,
                "rows": c.rows,
                "cols": c.cols,
                "trials": c.trials,
                "holds": c.verdicts.get("holds", 0),
                "equality": c.verdicts.get("equality", 0),
                "violated": c.verdicts.get("violated", 0),
                "degenerate": c.verdicts.get("degenerate", 0),
                "error": c.verdicts.get("error", 0),
                "min_slack": c.min_slack,
                "min_slack_seed": c.min_slack_seed,
                "mean_slack": c.mean_slack,
                "equality_count": c.equality_count,
            }
            lines.append(",".join(fmt(row.get(k)) for k in cols))
        for r in self.probes:
            row = {
                "section": "probe",
                "claim": r.claim,
                "p": r.p,
                "n": r.n,
                "rows": r.rows,
                "cols": r.cols,
                "trials": r.trials,
                "max_abs_discrepancy": r.max_abs_discrepancy,
                "mean_abs_discrepancy": r.mean_abs_discrepancy,
                "max_rel_discrepancy": r.max_rel_discrepancy,
                "max_seed": r.max_seed,
            }
            lines.append(",".join(fmt(row.get(k)) for k in cols))
        return "\n".join(lines) + "\n"


def run_trial(
    claim: str,
    p: float,
    n: int,
    dim: tuple[int, int],
    template: GeneratorSpec,
    seed: int,
    policy: TolerancePolicy | None = None,
    epsilon_zero: float = DEFAULT_EPSILON_ZERO,
    variant: str | None = None,
) -> tuple[CheckResult, list[OperatorFamily]]:
    """One trial, including the tightened recheck of suspected violations.

    This is also the replay entry point: feeding a report's min_slack_seed
    back in reproduces the recorded slack exactly.
    """
    families = instantiate_families(claim, n, dim, template, seed)
    result = evaluate_claim(
        claim, families, p, n=n, policy=policy,
        epsilon_zero=epsilon_zero, variant=variant,
    )
    # The operator-norm probe asserts nothing; its nominal "violations" are
    # the measurement itself and need no recheck.
    if result.verdict == "violated" and claim != "eq12_probe":
        with eigensolver_tolerance(RECHECK_TOL_SCALE):
            result = evaluate_claim(
                claim, families, p, n=n, policy=policy,
                epsilon_zero=epsilon_zero, variant=variant,
            )
    return result, families


def _witness_name(cell: _Cell, seed: int) -> str:
    p_txt = repr(cell.p)
    variant = f"_{cell.variant}" if cell.variant else ""
    return (
        f"{cell.claim}{variant}_{p_txt}_{cell.n}_"
        f"{cell.dim[0]}x{cell.dim[1]}_{seed}.json"
    )


def _run_cell(
    cell: _Cell,
    plan: SweepPlan,
) -> CellRecord | ProbeRecord:
    policy = plan.tolerance
    if cell.claim == "eq12_probe":
        total_abs = 0.0
        max_abs = 0.0
        max_rel = 0.0
        max_seed = None
        for t in range(cell.trials):
            seed = mix_seed(plan.base_seed, cell.index, t)
            res, _ = run_trial(
                cell.claim, cell.p, cell.n, cell.dim, plan.generator, seed,
                policy,
            )
            disc = abs(res.lhs - res.rhs)
            rel = disc / max(1.0, abs(res.lhs), abs(res.rhs))
            total_abs += disc
            if disc >= max_abs:
                max_abs = disc
                max_seed = seed
            max_rel = max(max_rel, rel)
        return ProbeRecord(
            claim=cell.claim,
            p=cell.p,
            n=cell.n,
            rows=cell.dim[0],
            cols=cell.dim[1],
            trials=cell.trials,
            max_abs_discrepancy=max_abs,
            mean_abs_discrepancy=total_abs / cell.trials,
            max_rel_discrepancy=max_rel,
            max_seed=max_seed,
        )

    verdicts = {"holds": 0, "equality": 0, "violated": 0, "degenerate": 0, "error": 0}
    slack_sum = 0.0
    slack_count = 0
    min_slack = None
    min_slack_seed = None
    witnesses: list[dict] = []
    errors: list[str] = []
    for t in range(cell.trials):
        seed = mix_seed(plan.base_seed, cell.index, t)
        try:
            result, families = run_trial(
                cell.claim, cell.p, cell.n, cell.dim, plan.generator, seed,
                policy, variant=cell.variant,
            )
        except SchattenLabError as exc:
            verdicts["error"] += 1
            if len(errors) < 5:
                errors.append(f"trial {t} (seed {seed}): {exc}")
            continue
        verdicts[result.verdict] += 1
        slack_sum += result.slack
        slack_count += 1
        if min_slack is None or result.slack < min_slack:
            min_slack = result.slack
            min_slack_seed = seed
        if result.verdict == "violated":
            name = _witness_name(cell, seed)
            witnesses.append(
                {
                    "name": name,
                    "payload": {
                        "schema": 1,
                        "claim": cell.claim,
                        "variant": cell.variant,
                        "p": cell.p,
                        "n": cell.n,
                        "rows": cell.dim[0],
                        "cols": cell.dim[1],
                        "seed": seed,
                        "check": result.to_json(),
                        "families": [f.to_json() for f in families],
                    },
                }
            )
    return CellRecord(
        claim=cell.claim,
        variant=cell.variant,
        p=cell.p,
        n=cell.n,
        rows=cell.dim[0],
        cols=cell.dim[1],
        trials=cell.trials,
        verdicts=verdicts,
        min_slack=min_slack,
        min_slack_seed=min_slack_seed,
        mean_slack=(slack_sum / slack_count) if slack_count else None,
        equality_count=verdicts["equality"],
        witnesses=witnesses,
        errors=errors,
    )


def _resolve_workers(workers: int | None) -> int:
    cap = os.environ.get(_ENV_THREADS)
    cap_val = None
    if cap is not None:
        try:
            cap_val = max(1, int(cap))
        except ValueError:
            cap_val = None
    if workers is None:
        workers = cap_val if cap_val is not None else 1
    elif cap_val is not None:
        workers = min(workers, cap_val)
    return max(1, workers)


def run_sweep(
    plan: SweepPlan,
    out_dir: str | None = None,
    workers: int | None = None,
) -> SweepReport:
    """Execute every cell of the plan and assemble the report.

    Cells are independent; with ``workers > 1`` they run in a process pool
    and are merged back in plan order, so the report is identical whatever
    the worker count. Confirmed-violation witnesses are embedded in the
    records and, if ``out_dir`` is given, written there as JSON files.
    The SCHATTEN_LAB_THREADS environment variable caps worker parallelism.
    """
    cells = plan.cells()
    workers = _resolve_workers(workers)
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_cell, cells, [plan] * len(cells)))
    else:
        records = [_run_cell(cell, plan) for cell in cells]

    cell_records = [r for r in records if isinstance(r, CellRecord)]
    probe_records = [r for r in records if isinstance(r, ProbeRecord)]

    witness_names = []
    for rec in cell_records:
        for w in rec.witnesses:
            witness_names.append(w["name"])
            if out_dir is not None:
                os.makedirs(out_dir, exist_ok=True)
                path = os.path.join(out_dir, w["name"])
                with open(path, "w", encoding="utf-8") as fh:
                    json.dump(w["payload"], fh, indent=2, sort_keys=True)
                    fh.write("\n")

    summary = {
        "cells": len(cell_records),
        "probe_cells": len(probe_records),
        "trials": sum(r.trials for r in cell_records),
        "violations": sum(r.verdicts["violated"] for r in cell_records),
        "errors": sum(r.verdicts["error"] for r in cell_records),
        "witnesses": witness_names,
    }
    return SweepReport(
        plan=plan,
        cells=cell_records,
        probes=probe_records,
        summary=summary,
        version=__version__,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    )


@dataclass(frozen=True)
class AnsatzFit:
    """Least-squares fit of the k-family within-mass relation.

    Fits y = alpha * f1 + beta * f2 where, over all unordered family pairs,
    f1 is the total cross-grid squared 2-norm mass and f2 the total squared
    2-norm of the pairwise member-difference sums; y is the total
    within-family mass. For k = 2 the exact relation has (alpha, beta) =
    (2, -2); the pairwise identity forces (2/(k-1), -2/(k-1)) in general,
    which the fit rediscovers empirically.
    """

    k: int
    alpha: float
    beta: float
    residual_rms: float
    instance_count: int
    scale: float
    exact_candidate: bool

    @property
    def coefficients(self) -> tuple[float, float]:
        return (self.alpha, self.beta)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "alpha": self.alpha,
            "beta": self.beta,
            "residual_rms": self.residual_rms,
            "instance_count": self.instance_count,
            "scale": self.scale,
            "exact_candidate": self.exact_candidate,
        }


def fit_kset_ansatz(
    k: int,
    spec: GeneratorSpec,
    instances: int,
) -> AnsatzFit:
    """Regress the k-family generalization of the two-family 2-norm identity.

    Draws ``instances`` independent k-tuples of families from the spec
    template, builds the two features, normalizes them to unit RMS and
    solves the 2x2 normal equations with a condition-number guard.
    """
    if not (isinstance(k, int) and k >= 2):
        raise ValidationError("k must be an integer >= 2")
    if not (isinstance(instances, int) and instances >= 3):
        raise ValidationError("need at least 3 instances (coefficients + 1)")
    ys = np.empty(instances)
    feats = np.empty((instances, 2))
    for idx in range(instances):
        fams = [
            generate(spec.with_seed(mix_seed(spec.seed, idx, m)))
            for m in range(k)
        ]
        ys[idx] = math.fsum(_grid_hs_sq(f, f) for f in fams)
        f1 = 0.0
        f2 = 0.0
        for m in range(k):
            for l in range(m + 1, k):
                f1 += _grid_hs_sq(fams[m], fams[l])
                f2 += _hs_sq(_sum_diff(fams[m], fams[l]))
        feats[idx, 0] = f1
        feats[idx, 1] = f2

    rms = np.sqrt(np.mean(feats**2, axis=0))
    if np.any(rms == 0.0):
        raise RankDeficiencyError(
            "a feature column is identically zero; cannot fit"
        )
    scaled = feats / rms
    g = scaled.T @ scaled
    trace = g[0, 0] + g[1, 1]
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    disc = math.sqrt(max((g[0, 0] - g[1, 1]) ** 2 + 4.0 * g[0, 1] ** 2, 0.0))
    lam_max = (trace + disc) / 2.0
    lam_min = (trace - disc) / 2.0
    if lam_min <= 1e-12 * lam_max:
        raise RankDeficiencyError(
            f"design matrix numerically rank deficient "
            f"(eigenvalues {lam_min:.3e}, {lam_max:.3e})"
        )
    rhs = scaled.T @ ys
    alpha_s = (g[1, 1] * rhs[0] - g[0, 1] * rhs[1]) / det
    beta_s = (g[0, 0] * rhs[1] - g[1, 0] * rhs[0]) / det
    alpha = float(alpha_s / rms[0])
    beta = float(beta_s / rms[1])
    resid = ys - feats @ np.array([alpha, beta])
    residual_rms = float(np.sqrt(np.mean(resid**2)))
    scale = max(1.0, float(np.sqrt(np.mean(ys**2))))
    return AnsatzFit(
        k=k,
        alpha=alpha,
        beta=beta,
        residual_rms=residual_rms,
        instance_count=instances,
        scale=scale,
        exact_candidate=residual_rms <= EXACT_CANDIDATE_RTOL * scale,
    )


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a tightness search."""

    claim: str
    p: float
    n: int
    dim: tuple[int, int]
    best_slack: float
    witness: dict
    evaluations: int
    restarts: int
    scale: float

    def to_json(self) -> dict:
        return {
            "claim": self.claim,
            "p": self.p,
            "n": self.n,
            "rows": self.dim[0],
            "cols": self.dim[1],
            "best_slack": self.best_slack,
            "evaluations": self.evaluations,
            "restarts": self.restarts,
            "scale": self.scale,
            "witness": self.witness,
        }


class _Budget:
    __slots__ = ("left",)

    def __init__(self, budget: int):
        self.left = budget


class _BudgetExhausted(Exception):
    pass


def _nelder_mead(fn, x0, step, budget: _Budget):
    """One budgeted Nelder-Mead descent; returns (best_x, best_f).

    Standard reflect/expand/contract/shrink polytope iteration; terminates
    on budget exhaustion or when the simplex function values collapse
    (stagnation), leaving restarts to the caller. Never exceeds the budget.
    """
    d = len(x0)

    def take(x):
        if budget.left <= 0:
            raise _BudgetExhausted
        budget.left -= 1
        return fn(x)

    pts = [np.array(x0, dtype=np.float64)]
    for i in range(d):
        x = pts[0].copy()
        x[i] += step
        pts.append(x)
    vals = []
    try:
        for x in pts:
            vals.append(take(x))
    except _BudgetExhausted:
        pass
    while len(vals) < len(pts):
        vals.append(math.inf)

    no_improve = 0
    best_seen = min(vals)
    try:
        while True:
            order = sorted(range(d + 1), key=lambda i: vals[i])
            pts = [pts[i] for i in order]
            vals = [vals[i] for i in order]
            spread = vals[-1] - vals[0]
            if spread <= 1e-14 * (1.0 + abs(vals[0])) or no_improve >= 10 * d + 20:
                break
            centroid = np.mean(pts[:-1], axis=0)
            worst = pts[-1]
            reflected = centroid + (centroid - worst)
            fr = take(reflected)
            if fr < vals[0]:
                expanded = centroid + 2.0 * (centroid - worst)
                fe = take(expanded)
                if fe < fr:
                    pts[-1], vals[-1] = expanded, fe
                else:
                    pts[-1], vals[-1] = reflected, fr
            elif fr < vals[-2]:
                pts[-1], vals[-1] = reflected, fr
            else:
                contracted = centroid + 0.5 * (worst - centroid)
                fc = take(contracted)
                if fc < vals[-1]:
                    pts[-1], vals[-1] = contracted, fc
                else:
                    for i in range(1, d + 1):
                        pts[i] = pts[0] + 0.5 * (pts[i] - pts[0])
                        vals[i] = take(pts[i])
            cur_best = min(vals)
            if cur_best < best_seen - 1e-13 * (1.0 + abs(best_seen)):
                best_seen = cur_best
                no_improve = 0
            else:
                no_improve += 1
    except _BudgetExhausted:
        pass
    best = min(range(d + 1), key=lambda i: vals[i])
    return pts[best], vals[best]


_SEARCHABLE = tuple(
    c for c in CLAIM_ARITY if CLAIM_ARITY[c] > 0
)


def tightness_search(
    claim: str,
    p: float,
    n: int,
    dim: tuple[int, int],
    budget: int,
    seed: int,
    policy: TolerancePolicy | None = None,
    epsilon_zero: float = DEFAULT_EPSILON_ZERO,
) -> SearchResult:
    """Minimize signed slack over family entries with multi-start descent.

    Families are flattened to a real vector (re/im interleaved). Claims with
    structural preconditions are searched inside the constraint-satisfying
    subspace: zero-sum families are re-centered, equal-sum pairs re-aligned,
    and positive-member chains parameterized through the Gram map, after
    every step. A negative best slack is never reported without re-running
    the winning instance at the 100x-tightened eigensolver tolerance.
    """
    if claim not in _SEARCHABLE:
        raise ValidationError(f"claim {claim!r} is not searchable over families")
    if not (isinstance(budget, int) and budget >= 1):
        raise ValidationError("budget must be an integer >= 1")
    rows, cols = dim
    arity = CLAIM_ARITY[claim]
    if claim in ("lemmaA", "lemmaA_refined") and rows != cols:
        raise ValidationError("positive-member chains need square matrices")
    if claim == "power_id":
        n_members = 1
    else:
        n_members = n
    dof = arity * n_members * rows * cols * 2

    from .matrix_core import ComplexMatrix

    def decode(x: np.ndarray) -> list[OperatorFamily]:
        arrs = x.reshape(arity, n_members, rows, cols, 2)
        fams = []
        for f_idx in range(arity):
            members = arrs[f_idx, ..., 0] + 1j * arrs[f_idx, ..., 1]
            if claim in ("lemmaA", "lemmaA_refined"):
                members = np.stack(
                    [
                        (m.conj().T @ m + (m.conj().T @ m).conj().T) / 2.0
                        for m in members
                    ]
                )
            fams.append(members)
        if claim == "cor24":
            fams[0] = fams[0] - fams[0].mean(axis=0)
        if claim == "cor23":
            shift = (fams[0].sum(axis=0) - fams[1].sum(axis=0)) / n_members
            fams[1] = fams[1] + shift
        return [
            OperatorFamily(ComplexMatrix.from_array(m) for m in fam)
            for fam in fams
        ]

    def objective(x: np.ndarray) -> float:
        try:
            res = evaluate_claim(
                claim, decode(x), p, n=n_members, policy=policy,
                epsilon_zero=epsilon_zero,
            )
        except SchattenLabError:
            return 1e300
        return res.slack

    budget_box = _Budget(budget)
    best_x: np.ndarray | None = None
    best_f = math.inf
    restarts = -1
    while budget_box.left > 0:
        restarts += 1
        rng = SplitMix64(mix_seed(seed, restarts))
        x0 = rng.gaussians(dof)
        x, f = _nelder_mead(objective, x0, 0.5, budget_box)
        if f < best_f:
            best_f = f
            best_x = x

    assert best_x is not None
    families = decode(best_x)
    final = evaluate_claim(
        claim, families, p, n=n_members, policy=policy,
        epsilon_zero=epsilon_zero,
    )
    if final.slack < 0.0:
        with eigensolver_tolerance(RECHECK_TOL_SCALE):
            final = evaluate_claim(
                claim, families, p, n=n_members, policy=policy,
                epsilon_zero=epsilon_zero,
            )
    scale = max(1.0, abs(final.lhs), abs(final.rhs))
    witness = {
        "claim": claim,
        "p": p,
        "check": final.to_json(),
        "families": [f.to_json() for f in families],
    }
    return SearchResult(
        claim=claim,
        p=float(p),
        n=n_members,
        dim=(rows, cols),
        best_slack=final.slack,
        witness=witness,
        evaluations=budget - budget_box.left,
        restarts=restarts,
        scale=scale,
    )
