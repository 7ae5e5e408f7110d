"""Structural condition checks, equilibria, and invariance verification.

Each checker returns a :class:`ConditionReport` carrying the tested
subjects and their signed slack (nonnegative where the condition holds),
so callers can see how close an instance sits to the boundary instead of
just a boolean.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import orthant_system, signature_of, simulate
from .errors import DimensionMismatch
from .numerics import solve_linear

COND_OFFSET_FAILED = "offset-nonneg-failed-rows"
COND_OFFSET_HEALTHY = "offset-nonneg-healthy-rows"
COND_DECOUPLED_ALL = "no-cross-sign-holdings"
COND_DECOUPLED_HEALTHY = "no-healthy-to-failed-holdings"
COND_ROW_SUM = "row-sum-contraction"
COND_BOUNDED_FAILURE = "bounded-failure-tolerance"


@dataclass
class ConditionReport:
    """Outcome of one structural condition check.

    ``subjects`` lists what was tested (company indices or holder/held
    index pairs); ``margins`` holds the matching signed slack.  A subject
    with negative margin violates the condition; zero margin sits exactly
    on the boundary and only counts as a violation for strict conditions.
    """

    condition: str
    holds: bool
    subjects: list
    margins: np.ndarray
    strict: bool = False

    @property
    def violations(self):
        cut = 0.0
        out = []
        for subject, margin in zip(self.subjects, self.margins):
            if margin < cut or (self.strict and margin <= cut):
                out.append((subject, float(margin)))
        return out


def report_as_dict(report):
    return {
        "condition": report.condition,
        "holds": bool(report.holds),
        "violations": [
            {"subject": list(s) if isinstance(s, tuple) else int(s), "margin": m}
            for s, m in report.violations
        ],
    }


def threshold_income(net, ext_frac):
    """External income level at which a healthy company exactly sustains
    its threshold: ``thr / ext - C @ (thr / ext)`` per company."""
    scaled = net.thresholds / ext_frac
    return scaled - net.cross_holdings @ scaled


def check_offset_nonneg(net, ext_frac, signs):
    """Signature-dependent income conditions keeping the orthant offset
    nonnegative.

    Failed rows need income at most ``threshold_income + failure_cost``;
    healthy rows need income at least ``threshold_income``.  Returns the
    (failed-rows, healthy-rows) report pair.
    """
    signs = np.asarray(signs, dtype=np.float64)
    income = net.external_income()
    base = threshold_income(net, ext_frac)
    failed = np.flatnonzero(signs < 0.0)
    healthy = np.flatnonzero(signs >= 0.0)
    m_failed = base[failed] + net.failure_cost - income[failed]
    m_healthy = income[healthy] - base[healthy]
    rep_failed = ConditionReport(
        COND_OFFSET_FAILED,
        bool((m_failed >= 0.0).all()),
        [int(i) for i in failed],
        m_failed,
    )
    rep_healthy = ConditionReport(
        COND_OFFSET_HEALTHY,
        bool((m_healthy >= 0.0).all()),
        [int(i) for i in healthy],
        m_healthy,
    )
    return rep_failed, rep_healthy


def check_decoupling(net, signs, healthy_only=False):
    """Structural zero-holdings conditions across the failure boundary.

    Full form: no holdings between companies of opposite signature.
    ``healthy_only``: only healthy holders must not hold failed
    companies.  Margins are ``-c_il`` (zero when satisfied).
    """
    signs = np.asarray(signs, dtype=np.float64)
    C = net.cross_holdings
    pos = signs >= 0.0
    if healthy_only:
        holder, held = np.nonzero(np.outer(pos, ~pos))
        condition = COND_DECOUPLED_HEALTHY
    else:
        holder, held = np.nonzero(np.outer(pos, ~pos) | np.outer(~pos, pos))
        condition = COND_DECOUPLED_ALL
    margins = -C[holder, held]
    subjects = [(int(i), int(l)) for i, l in zip(holder, held)]
    return ConditionReport(condition, bool((margins >= 0.0).all()), subjects, margins)


def check_row_sum_stability(net, ext_frac):
    """Strict row-sum contraction of the orthant coupling.

    The tested quantity ``sum_l ext_i c_il / ext_l`` does not depend on
    the signature, so one report covers every orthant.  Equality to one
    counts as a violation (zero margin, strict condition).
    """
    q = (net.cross_holdings / ext_frac[None, :]).sum(axis=1) * ext_frac
    margins = 1.0 - q
    return ConditionReport(
        COND_ROW_SUM,
        bool((margins > 0.0).all()),
        list(range(net.n_companies)),
        margins,
        strict=True,
    )


@dataclass
class EquilibriumResult:
    """Fixed point of one orthant's affine dynamics.

    ``consistent`` records whether the fixed point actually lies in the
    assumed orthant; ``stable`` mirrors the row-sum contraction check.
    """

    X_star: np.ndarray
    x_star: np.ndarray
    v_star: np.ndarray
    consistent: bool
    stable: bool


def equilibrium(net, ext_frac, signs):
    signs = np.asarray(signs, dtype=np.float64)
    system = orthant_system(net, ext_frac, signs)
    n = net.n_companies
    X_star = solve_linear(np.eye(n) - system.coupling, system.offset)
    x_star = signs * X_star
    v_star = x_star + net.thresholds
    consistent = bool((signature_of(x_star) == signs).all())
    stable = check_row_sum_stability(net, ext_frac).holds
    return EquilibriumResult(X_star, x_star, v_star, consistent, stable)


@dataclass
class FailureBoundBox:
    """Per-company upper bounds on failed-state magnitudes.

    Only the entries at failed positions of the signature in use are
    read; bounds must be nonnegative."""

    bounds: np.ndarray

    def __post_init__(self):
        self.bounds = np.ascontiguousarray(self.bounds, dtype=np.float64)
        if (self.bounds < 0.0).any():
            raise ValueError("failure bounds must be nonnegative")


def check_bounded_failure(net, ext_frac, signs, box, unscaled=False):
    """Income condition tolerating bounded failed neighbors.

    For each healthy company the required income rises by the worst-case
    drag of its failed holdings, ``-(A_neg @ bounds) / ext`` (the
    ``unscaled`` variant drops the division; it is the looser published
    shape of the same bound and is kept for comparison).
    """
    signs = np.asarray(signs, dtype=np.float64)
    if box.bounds.shape[0] != net.n_companies:
        raise DimensionMismatch("box length does not match the network")
    system = orthant_system(net, ext_frac, signs)
    healthy = np.flatnonzero(signs >= 0.0)
    failed = np.flatnonzero(signs < 0.0)
    drag = system.coupling[np.ix_(healthy, failed)] @ box.bounds[failed]
    required = threshold_income(net, ext_frac)[healthy]
    if unscaled:
        required = required - drag
    else:
        required = required - drag / ext_frac[healthy]
    margins = net.external_income()[healthy] - required
    return ConditionReport(
        COND_BOUNDED_FAILURE,
        bool((margins >= 0.0).all()),
        [int(i) for i in healthy],
        margins,
    )


@dataclass
class InvarianceResult:
    ok: bool
    first_violation: object  # FailureEvent or None
    trajectory: object


def verify_invariance(net, ext_frac, x0, horizon, mode="all", signs=None):
    """Simulate and check that the starting orthant is respected.

    ``mode="all"``: no company may change sign at any step.
    ``mode="healthy"``: companies starting healthy must stay healthy;
    failed companies may recover.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    sig0 = signature_of(x0)
    if signs is not None and not (np.asarray(signs) == sig0).all():
        raise ValueError("given signature does not match the start state")
    if mode not in ("all", "healthy"):
        raise ValueError(f"unknown mode {mode!r}")
    traj = simulate(net, ext_frac, x0, horizon)
    for event in traj.events:
        if mode == "all":
            return InvarianceResult(False, event, traj)
        if event.direction == "fail" and sig0[event.company] > 0.0:
            return InvarianceResult(False, event, traj)
    return InvarianceResult(True, None, traj)
