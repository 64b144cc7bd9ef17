"""Check results and tolerance policies.

Every identity/inequality evaluator in the package reports a
:class:`CheckResult`: both sides of the claim, a signed slack oriented so
that nonnegative slack means "the claim holds", and a verdict derived from a
:class:`TolerancePolicy`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError

DIRECTIONS = ("geq", "leq", "eq")
VERDICTS = ("holds", "equality", "violated", "degenerate")

#: Stable claim identifiers used in reports, witness filenames and the CLI.
CLAIM_IDS = (
    "eq13",
    "thm21",
    "prop22",
    "cor23",
    "cor24",
    "prop25",
    "remark_i",
    "lemmaA",
    "lemmaA_refined",
    "power_id",
    "identity14",
    "eq12_probe",  # measurement only; quarantined from verdict statistics
)


@dataclass(frozen=True)
class TolerancePolicy:
    """Adjudication tolerances for floating-point claim checking.

    ``tolerance = abs + rel * scale`` where ``scale`` is ``max(1, |lhs|, |rhs|)``
    for ``scale_mode="max_side"`` and ``1`` for ``scale_mode="one"``.
    """

    rel: float = 1e-9
    abs: float = 1e-12
    scale_mode: str = "max_side"

    def __post_init__(self) -> None:
        if not (self.rel > 0.0 and self.abs > 0.0):
            raise ValidationError("tolerances must be strictly positive")
        if self.scale_mode not in ("max_side", "one"):
            raise ValidationError(f"unknown scale_mode {self.scale_mode!r}")

    def tolerance(self, lhs: float, rhs: float) -> float:
        scale = max(1.0, abs(lhs), abs(rhs)) if self.scale_mode == "max_side" else 1.0
        return self.abs + self.rel * scale

    def to_json(self) -> dict:
        return {"rel": self.rel, "abs": self.abs, "scale_mode": self.scale_mode}

    @classmethod
    def from_json(cls, obj: dict) -> "TolerancePolicy":
        if not isinstance(obj, dict):
            raise ValidationError("tolerance policy must be a JSON object")
        try:
            return cls(
                rel=float(obj.get("rel", 1e-9)),
                abs=float(obj.get("abs", 1e-12)),
                scale_mode=str(obj.get("scale_mode", "max_side")),
            )
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad tolerance policy: {exc}") from exc


DEFAULT_POLICY = TolerancePolicy()


@dataclass(frozen=True)
class CheckResult:
    """One evaluated instance of an identity or inequality.

    ``slack`` is ``lhs - rhs`` for direction ``geq``, ``rhs - lhs`` for
    ``leq`` and ``-|lhs - rhs|`` for ``eq``; nonnegative slack (within
    tolerance) means the claim holds on this instance.
    """

    claim_id: str
    p: float
    n: int
    dim: tuple[int, int]
    lhs: float
    rhs: float
    direction: str
    slack: float
    verdict: str
    abs_tol: float
    rel_tol: float
    witness_ref: str | None = None
    extras: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        """True unless the instance violated the claim."""
        return self.verdict != "violated"

    def to_json(self) -> dict:
        """Flat JSON object; ``extras`` entries are merged at top level."""
        out = {
            "claim_id": self.claim_id,
            "p": self.p,
            "n": self.n,
            "rows": self.dim[0],
            "cols": self.dim[1],
            "lhs": self.lhs,
            "rhs": self.rhs,
            "direction": self.direction,
            "slack": self.slack,
            "verdict": self.verdict,
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "witness_ref": self.witness_ref,
        }
        for key, value in self.extras.items():
            out.setdefault(key, value)
        return out


def signed_slack(lhs: float, rhs: float, direction: str) -> float:
    if direction == "geq":
        return lhs - rhs
    if direction == "leq":
        return rhs - lhs
    if direction == "eq":
        return -abs(lhs - rhs)
    raise ValidationError(f"unknown direction {direction!r}")


def build_check(
    claim_id: str,
    p: float,
    n: int,
    dim: tuple[int, int],
    lhs: float,
    rhs: float,
    direction: str,
    policy: TolerancePolicy | None = None,
    *,
    degenerate: bool = False,
    strict: bool = False,
    extras: dict | None = None,
    abs_tol_override: float | None = None,
) -> CheckResult:
    """Assemble a CheckResult with the shared verdict logic.

    ``degenerate`` marks vacuous instances (e.g. all-zero families).
    ``strict`` is used by strict-inequality claims: a gap indistinguishable
    from zero cannot certify strictness and is reported as degenerate instead
    of equality. ``abs_tol_override`` lets a caller embed a precomputed scale
    into the absolute term (the relative term is then dropped).
    """
    if claim_id not in CLAIM_IDS:
        raise ValidationError(f"unknown claim id {claim_id!r}")
    policy = policy or DEFAULT_POLICY
    slack = signed_slack(lhs, rhs, direction)
    if abs_tol_override is not None:
        abs_tol, rel_tol = abs_tol_override, 0.0
        tol = abs_tol
    else:
        abs_tol, rel_tol = policy.abs, policy.rel
        tol = policy.tolerance(lhs, rhs)

    if degenerate:
        verdict = "degenerate"
    elif strict:
        if slack < -tol:
            verdict = "violated"
        elif slack <= tol:
            verdict = "degenerate"
        else:
            verdict = "holds"
    elif abs(lhs - rhs) <= tol:
        verdict = "equality"
    elif slack >= -tol:
        verdict = "holds"
    else:
        verdict = "violated"

    return CheckResult(
        claim_id=claim_id,
        p=p,
        n=n,
        dim=dim,
        lhs=lhs,
        rhs=rhs,
        direction=direction,
        slack=slack,
        verdict=verdict,
        abs_tol=abs_tol,
        rel_tol=rel_tol,
        extras=dict(extras or {}),
    )
