"""Command-line interface.

Subcommands: verify (one claim on explicit families), sweep (batch grid
verification), search (tightness search), probe (operator-norm probe),
fit (k-family relation fit) and selftest (embedded example corpus).

Exit codes: 0 success / claim holds, 1 input or usage error, 2 a claim
instance was violated (or a sweep persisted at least one violation).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from . import harness
from ._version import __version__
from .errors import SchattenLabError, ValidationError
from .generators import GeneratorSpec
from .matrix_core import OperatorFamily
from .parallelogram import DEFAULT_EPSILON_ZERO
from .results import CheckResult
from .selftest import run_selftest

#: Claims whose evaluators need an explicit p.
_P_REQUIRED = (
    "thm21", "prop22", "cor23", "cor24", "prop25",
    "lemmaA", "lemmaA_refined", "power_id", "remark_i",
)


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON: {exc}") from exc


def _load_family(path: str) -> OperatorFamily:
    try:
        return OperatorFamily.from_json(_load_json(path))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _check_csv(res: CheckResult) -> str:
    obj = res.to_json()
    keys = list(obj.keys())

    def fmt(v) -> str:
        if v is None:
            return ""
        if isinstance(v, float):
            return format(v, ".17g")
        return str(v)

    return ",".join(keys) + "\n" + ",".join(fmt(obj[k]) for k in keys) + "\n"


def _emit_check(res: CheckResult, fmt: str) -> None:
    if fmt == "csv":
        sys.stdout.write(_check_csv(res))
    else:
        print(json.dumps(res.to_json(), indent=2, sort_keys=True))


def _parse_dim(text: str) -> tuple[int, int]:
    try:
        if "x" in text:
            r, c = text.lower().split("x", 1)
            return int(r), int(c)
        d = int(text)
        return d, d
    except ValueError as exc:
        raise ValidationError(f"bad --dim {text!r}; expected e.g. 4 or 4x4") from exc


def _cmd_verify(args) -> int:
    claim = args.claim
    arity = harness.CLAIM_ARITY.get(claim)
    if arity is None:
        raise ValidationError(f"unknown claim id {claim!r}")
    # p is parsed from its decimal string exactly once, right here.
    p = float(args.p) if args.p is not None else 2.0
    if args.p is None and claim in _P_REQUIRED:
        raise ValidationError(f"claim {claim!r} needs --p")
    families = [_load_family(path) for path in args.families or []]
    if len(families) != arity:
        raise ValidationError(
            f"claim {claim!r} takes {arity} families, got {len(families)}"
        )
    res = harness.evaluate_claim(
        claim,
        families,
        p,
        n=args.n,
        epsilon_zero=args.epsilon_zero,
        variant=args.variant,
    )
    _emit_check(res, args.format)
    return 0 if res.ok else 2


def _cmd_sweep(args) -> int:
    if args.plan is not None:
        plan = harness.SweepPlan.from_json(_load_json(args.plan))
    else:
        plan = harness.demo_plan()
    if args.seed is not None:
        plan = replace(plan, base_seed=args.seed)
    report = harness.run_sweep(plan, out_dir=args.out, workers=args.workers)
    os.makedirs(args.out, exist_ok=True)
    if args.format == "csv":
        path = os.path.join(args.out, "report.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
    else:
        path = os.path.join(args.out, "report.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report.canonical_json())
    s = report.summary
    print(
        f"{s['cells']} cells, {s['trials']} trials, "
        f"{s['violations']} violations, {s['errors']} errors -> {path}"
    )
    return 2 if report.violations > 0 else 0


def _cmd_search(args) -> int:
    p = float(args.p)
    res = harness.tightness_search(
        args.claim,
        p,
        args.n,
        _parse_dim(args.dim),
        args.budget,
        args.seed,
        epsilon_zero=args.epsilon_zero,
    )
    print(json.dumps(res.to_json(), indent=2, sort_keys=True))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        name = f"search_{args.claim}_{p!r}_{args.n}_{args.seed}.json"
        with open(os.path.join(args.out, name), "w", encoding="utf-8") as fh:
            json.dump(res.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 2 if res.witness["check"]["verdict"] == "violated" else 0


def _cmd_probe(args) -> int:
    families = [_load_family(path) for path in args.families]
    if len(families) != 2:
        raise ValidationError("probe takes exactly 2 families")
    res = harness.probe_spectral_norm_identity(families[0], families[1])
    _emit_check(res, args.format)
    return 0


def _cmd_fit(args) -> int:
    if args.spec is not None:
        spec = GeneratorSpec.from_json(_load_json(args.spec))
    else:
        spec = GeneratorSpec(
            "ginibre",
            n=args.n,
            rows=args.rows,
            cols=args.cols,
            scale=args.scale,
            seed=args.seed,
        )
    fit = harness.fit_kset_ansatz(args.k, spec, args.instances)
    print(json.dumps(fit.to_json(), indent=2, sort_keys=True))
    return 0


def _cmd_selftest(_args) -> int:
    failures = run_selftest(print)
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schattenlab",
        description=(
            "Verification lab for Schatten p-norm parallelogram-type "
            "identities and inequalities on dense complex matrices."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="evaluate one claim on explicit families")
    pv.add_argument("--claim", required=True, help="claim id, e.g. prop22")
    pv.add_argument("--p", help="norm exponent as a decimal string")
    pv.add_argument(
        "--families", nargs="*", metavar="PATH",
        help="family JSON files (claim arity of them)",
    )
    pv.add_argument("--n", type=int, help="family size for the family-free remark_i")
    pv.add_argument("--variant", choices=("paper_2n2", "consistent_n2"),
                    help="constant variant for remark_i")
    pv.add_argument("--epsilon-zero", type=float, default=DEFAULT_EPSILON_ZERO,
                    dest="epsilon_zero", help="zero-member classification threshold")
    pv.add_argument("--format", choices=("json", "csv"), default="json")
    pv.set_defaults(fn=_cmd_verify)

    ps = sub.add_parser("sweep", help="run a verification sweep plan")
    ps.add_argument("--plan", help="plan JSON path (default: bundled demo plan)")
    ps.add_argument("--out", default=".", help="output directory for report and witnesses")
    ps.add_argument("--format", choices=("json", "csv"), default="json")
    ps.add_argument("--seed", type=int, help="override the plan base seed")
    ps.add_argument("--workers", type=int, help="worker processes "
                    "(SCHATTEN_LAB_THREADS caps this)")
    ps.set_defaults(fn=_cmd_sweep)

    pq = sub.add_parser("search", help="minimize claim slack over family entries")
    pq.add_argument("--claim", required=True)
    pq.add_argument("--p", required=True, help="norm exponent as a decimal string")
    pq.add_argument("--n", type=int, required=True)
    pq.add_argument("--dim", required=True, help="member shape, e.g. 2 or 2x2")
    pq.add_argument("--budget", type=int, default=10000)
    pq.add_argument("--seed", type=int, default=0)
    pq.add_argument("--epsilon-zero", type=float, default=DEFAULT_EPSILON_ZERO,
                    dest="epsilon_zero")
    pq.add_argument("--out", help="directory for the witness JSON")
    pq.set_defaults(fn=_cmd_search)

    pp = sub.add_parser("probe", help="measure the operator-norm reading "
                        "of the two-family expression (asserts nothing)")
    pp.add_argument("--families", nargs=2, required=True, metavar="PATH")
    pp.add_argument("--format", choices=("json", "csv"), default="json")
    pp.set_defaults(fn=_cmd_probe)

    pf = sub.add_parser("fit", help="fit the k-family quadratic-mass relation")
    pf.add_argument("--k", type=int, required=True)
    pf.add_argument("--instances", type=int, default=64)
    pf.add_argument("--spec", help="generator spec JSON path")
    pf.add_argument("--n", type=int, default=2)
    pf.add_argument("--rows", type=int, default=2)
    pf.add_argument("--cols", type=int, default=2)
    pf.add_argument("--scale", type=float, default=1.0)
    pf.add_argument("--seed", type=int, default=0)
    pf.set_defaults(fn=_cmd_fit)

    pt = sub.add_parser("selftest", help="run the embedded example corpus")
    pt.set_defaults(fn=_cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SchattenLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
