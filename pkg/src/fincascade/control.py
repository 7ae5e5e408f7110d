"""Stabilizing investment control: constant feedforward, LP-designed
feedback gain, and investment-matrix recovery.

The feedforward part u1 buys each company enough external income to hold
its orthant; the feedback part u2 = J K X reshapes the coupling so every
closed-loop row sum contracts.  A second LP turns the combined demand
into an admissible asset allocation, and the closed-loop simulator
replays the cascade dynamics with the allocation's realized income.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .analysis import FailureBoundBox, threshold_income
from .dynamics import (
    Trajectory,
    _events_from_signs,
    failure_penalty,
    orthant_system,
    signature_of,
)
from .errors import (
    InfeasibleEps,
    InvalidSlack,
    LpInfeasible,
    LpUnbounded,
    NumericalBreakdown,
)
from .lp_solver import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, solve_lp

EPSILON_DEFAULT = 1e-6
GAIN_TOL = 1e-10


def _check_slack(xi, n):
    xi = np.ascontiguousarray(xi, dtype=np.float64)
    if xi.shape != (n,):
        raise InvalidSlack(f"slack must have length {n}")
    if (xi <= 0.0).any():
        raise InvalidSlack("slack must be strictly positive componentwise")
    return xi


def default_slack(net):
    """All-ones slack scaled to 1% of the mean threshold."""
    level = 0.01 * float(net.thresholds.mean())
    if level <= 0.0:
        level = 1.0
    return np.full(net.n_companies, level)


def signature_penalty(net, signs):
    return np.where(np.asarray(signs) < 0.0, net.failure_cost, 0.0)


def offset_with_income(net, ext_frac, signs, income):
    """Orthant offset when per-company external income is ``income``
    instead of the network's asset portfolio."""
    signs = np.asarray(signs, dtype=np.float64)
    W = (net.cross_holdings * ext_frac[:, None]) / ext_frac[None, :]
    pen = signature_penalty(net, signs)
    return signs * (W @ net.thresholds - net.thresholds + ext_frac * (income - pen))


def design_u1(net, ext_frac, signs, xi):
    """Feedforward income making the orthant offset nonnegative.

    Every company receives its threshold-sustaining income, failed
    companies additionally cover the failure cost, and the slack xi
    pushes the offset strictly positive for healthy companies.
    """
    signs = np.asarray(signs, dtype=np.float64)
    xi = _check_slack(xi, net.n_companies)
    base = threshold_income(net, ext_frac)
    u1 = base + signature_penalty(net, signs) + signs * xi
    b_tilde = offset_with_income(net, ext_frac, signs, u1)
    assert (b_tilde >= -GAIN_TOL).all(), "designed offset went negative"
    return u1


def design_u1_bounded(net, ext_frac, signs, box, xi):
    """Feedforward for healthy companies only, tolerating bounded failed
    neighbors.

    Each healthy company's income covers its threshold plus the worst
    drag its failed holdings can exert under ``box``.  Entries at failed
    positions are zero; their demand is clamped downstream anyway.
    """
    signs = np.asarray(signs, dtype=np.float64)
    xi = _check_slack(xi, net.n_companies)
    healthy = np.flatnonzero(signs >= 0.0)
    failed = np.flatnonzero(signs < 0.0)
    system = orthant_system(net, ext_frac, signs)
    drag = system.coupling[np.ix_(healthy, failed)] @ box.bounds[failed]
    u1 = np.zeros(net.n_companies)
    u1[healthy] = (
        threshold_income(net, ext_frac)[healthy]
        - drag / ext_frac[healthy]
        + xi[healthy]
    )
    return u1


def build_lp1(net, ext_frac, epsilon, signs=None):
    """Gain-synthesis linear program over the flattened gain matrix.

    Variables k[i*n+l] = gain from company l's state into company i's
    investment.  Element lower bounds keep every closed-loop coupling
    entry nonnegative; per-row sum windows keep row sums in
    [0, 1 - epsilon * ext_i]; diagonal entries are fixed at zero.  The
    objective maximizes the total gain.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    n = net.n_companies
    if signs is None:
        signs = np.ones(n)
    signs = np.asarray(signs, dtype=np.float64)
    system = orthant_system(net, ext_frac, signs)
    A = system.coupling
    row_sums = A.sum(axis=1)
    gamma = (1.0 - row_sums) / ext_frac - epsilon
    mu = row_sums / ext_frac
    bad = np.flatnonzero(gamma < -mu)
    if bad.size:
        raise InfeasibleEps(
            f"epsilon={epsilon} exceeds 1/ext for rows {bad.tolist()[:10]}"
        )

    lower = (-A / ext_frac[:, None]).reshape(-1)
    ineq = np.zeros((2 * n, n * n))
    rhs = np.empty(2 * n)
    for i in range(n):
        ineq[i, i * n : (i + 1) * n] = 1.0
        ineq[n + i, i * n : (i + 1) * n] = -1.0
        rhs[i] = gamma[i]
        rhs[n + i] = mu[i]
    fixed = [(i * n + i, 0.0) for i in range(n)]
    return LinearProgram(
        objective=-np.ones(n * n),
        ineq_lhs=ineq,
        ineq_rhs=rhs,
        fixed=fixed,
        lower_bounds=lower,
    )


def design_K(net, ext_frac, signs, epsilon):
    """Solve the gain LP and return the gain matrix, checking the
    stability conclusions on the closed-loop coupling."""
    n = net.n_companies
    program = build_lp1(net, ext_frac, epsilon, signs=signs)
    sol = solve_lp(program)
    if sol.status == INFEASIBLE:
        raise LpInfeasible("gain synthesis infeasible at this epsilon")
    if sol.status == UNBOUNDED:
        raise LpUnbounded("gain synthesis unbounded; constraints are inconsistent")
    K = sol.z.reshape(n, n)
    A = orthant_system(net, ext_frac, np.asarray(signs, dtype=np.float64)).coupling
    closed = A + ext_frac[:, None] * K
    if closed.min() < -GAIN_TOL:
        raise NumericalBreakdown("closed-loop coupling has a negative entry")
    if np.abs(np.diag(closed)).max() > 0.0:
        raise NumericalBreakdown("closed-loop diagonal is not exactly zero")
    sums = closed.sum(axis=1)
    # at the optimum each row sum reaches 1 - ext_i * epsilon exactly
    if sums.min() < -GAIN_TOL or (sums > 1.0 - ext_frac * epsilon + GAIN_TOL).any():
        raise NumericalBreakdown("closed-loop row sums escaped their window")
    return K


def clamp_demands(u1, u2, signs):
    """Per-company investment demand: failed companies and negative
    combined controls demand nothing."""
    total = np.asarray(u1, dtype=np.float64) + np.asarray(u2, dtype=np.float64)
    signs = np.asarray(signs)
    return np.where((signs < 0.0) | (total < 0.0), 0.0, total)


def build_lp2(w, p):
    """Investment-allocation linear program over the flattened share
    matrix d[i*m+h].

    Equalities buy each company exactly its demand at current prices;
    per-company budgets and per-asset capacities stay within one.  The
    objective maximizes total allocated shares, favoring cheap assets.
    """
    w = np.ascontiguousarray(w, dtype=np.float64)
    p = np.ascontiguousarray(p, dtype=np.float64)
    if (w < 0.0).any():
        raise ValueError("demands must be nonnegative")
    if (p <= 0.0).any():
        raise ValueError("prices must be positive")
    n = w.shape[0]
    m = p.shape[0]
    eq = np.zeros((n, n * m))
    for i in range(n):
        eq[i, i * m : (i + 1) * m] = p
    ineq = np.zeros((n + m, n * m))
    for i in range(n):
        ineq[i, i * m : (i + 1) * m] = 1.0
    for h in range(m):
        ineq[n + h, h::m] = 1.0
    return LinearProgram(
        objective=-np.ones(n * m),
        ineq_lhs=ineq,
        ineq_rhs=np.ones(n + m),
        eq_lhs=eq,
        eq_rhs=w,
    )


@dataclass
class InvestmentSolution:
    """Asset allocation realizing per-company demands.

    ``demands_met`` holds the absolute demand residuals; ``clamped``
    lists companies whose demand was zeroed before the solve; ``scale``
    is below one when the demands had to be shrunk to fit capacity.
    """

    D_new: np.ndarray
    demands_met: np.ndarray
    clamped: list
    scaled: bool = False
    scale: float = 1.0


def solve_investments(w, p, clamped=(), allow_scaling=True):
    """Allocate assets to meet demands, shrinking them proportionally
    when capacity cannot cover the total."""
    w = np.ascontiguousarray(w, dtype=np.float64)
    p = np.ascontiguousarray(p, dtype=np.float64)
    n = w.shape[0]
    m = p.shape[0]
    scale = 1.0
    total = w.sum()
    cap = p.sum()
    if allow_scaling and total > cap:
        scale = cap / total
    for _ in range(60):
        sol = solve_lp(build_lp2(scale * w, p))
        if sol.status == OPTIMAL:
            D = sol.z.reshape(n, m)
            return InvestmentSolution(
                D_new=D,
                demands_met=np.abs(D @ p - scale * w),
                clamped=list(clamped),
                scaled=scale < 1.0,
                scale=scale,
            )
        if sol.status == UNBOUNDED or not allow_scaling:
            break
        scale *= 0.5
        if scale * total < 1e-300:
            scale = 0.0
    raise LpInfeasible("investment allocation failed even after scaling demands")


@dataclass
class ControlPlan:
    """One step's control design."""

    u1: np.ndarray
    K_tilde: np.ndarray | None
    xi: np.ndarray
    epsilon: float
    activation_t: int
    signs: np.ndarray

    def __post_init__(self):
        if self.K_tilde is not None:
            assert np.abs(np.diag(self.K_tilde)).max() == 0.0

    def u2_of(self, X):
        if self.K_tilde is None:
            return np.zeros(self.signs.shape[0])
        return self.signs * (self.K_tilde @ np.asarray(X, dtype=np.float64))


@dataclass
class ClosedLoop:
    A_tilde: np.ndarray
    b_tilde: np.ndarray


def assemble_closed_loop(net, ext_frac, signs, plan):
    signs = np.asarray(signs, dtype=np.float64)
    A = orthant_system(net, ext_frac, signs).coupling
    K = plan.K_tilde if plan.K_tilde is not None else np.zeros_like(A)
    return ClosedLoop(
        A_tilde=A + ext_frac[:, None] * K,
        b_tilde=offset_with_income(net, ext_frac, signs, plan.u1),
    )


@dataclass
class StepRecord:
    t: int
    plan: ControlPlan
    investment: InvestmentSolution
    demand: np.ndarray


@dataclass
class ClosedLoopRun:
    trajectory: Trajectory
    steps: list = field(default_factory=list)

    def scaled_steps(self):
        return [rec.t for rec in self.steps if rec.investment.scaled]


MODE_U1 = "u1_only"
MODE_U1_U2 = "u1_and_u2"


def simulate_closed_loop(
    net,
    ext_frac,
    x0,
    horizon,
    activation_t,
    epsilon=EPSILON_DEFAULT,
    xi=None,
    mode=MODE_U1,
    freeze_gain=False,
):
    """Run the cascade dynamics with control switching on at
    ``activation_t``.

    Each controlled step rebuilds the feedforward from the current
    signature (tolerating the currently failed magnitudes), optionally
    redesigns the gain, allocates investments, and steps the dynamics on
    the allocation's realized income.  ``freeze_gain`` reuses the first
    designed gain instead of re-solving every step.
    """
    if mode not in (MODE_U1, MODE_U1_U2):
        raise ValueError(f"unknown mode {mode!r}")
    if not 0 <= activation_t <= horizon:
        raise ValueError("activation time must lie within the horizon")
    n = net.n_companies
    xi = default_slack(net) if xi is None else _check_slack(xi, n)
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    W = (net.cross_holdings * ext_frac[:, None]) / ext_frac[None, :]
    drive = W @ net.thresholds - net.thresholds
    income0 = net.external_income()

    errors = np.empty((horizon + 1, n))
    errors[0] = x0
    x = x0.copy()
    steps = []
    gain = None
    lp2_cache = {}
    for t in range(horizon):
        if t < activation_t:
            income = income0
        else:
            signs = signature_of(x)
            failed = signs < 0.0
            if failed.any():
                box = FailureBoundBox(np.where(failed, -np.minimum(x, 0.0), 0.0))
                u1 = design_u1_bounded(net, ext_frac, signs, box, xi)
            else:
                u1 = design_u1(net, ext_frac, signs, xi)
            if mode == MODE_U1_U2:
                if gain is None or not freeze_gain:
                    gain = design_K(net, ext_frac, signs, epsilon)
                u2 = signs * (gain @ (signs * x))
            else:
                u2 = np.zeros(n)
            w = clamp_demands(u1, u2, signs)
            key = w.tobytes()
            invest = lp2_cache.get(key)
            if invest is None:
                clamped = np.flatnonzero(w != u1 + u2).tolist()
                invest = solve_investments(w, net.prices, clamped=clamped)
                lp2_cache[key] = invest
            income = invest.D_new @ net.prices
            plan = ControlPlan(
                u1=u1,
                K_tilde=gain if mode == MODE_U1_U2 else None,
                xi=xi,
                epsilon=epsilon,
                activation_t=activation_t,
                signs=signs,
            )
            steps.append(StepRecord(t=t, plan=plan, investment=invest, demand=w))
        pen = failure_penalty(x, net.failure_cost)
        x = W @ x + drive + ext_frac * (income - pen)
        errors[t + 1] = x

    signs_path = np.where(errors < 0.0, -1.0, 1.0)
    traj = Trajectory(
        errors=errors, signs=signs_path, events=_events_from_signs(signs_path)
    )
    return ClosedLoopRun(trajectory=traj, steps=steps)


def _triplets(M, tol=0.0):
    out = []
    rows, cols = np.nonzero(np.abs(M) > tol)
    for i, j in zip(rows, cols):
        out.append([int(i), int(j), float(M[i, j])])
    return out


def write_control_log(path, run):
    doc = {"steps": []}
    for rec in run.steps:
        entry = {
            "t": rec.t,
            "u1": [float(v) for v in rec.plan.u1],
            "w": [float(v) for v in rec.demand],
            "K_tilde": _triplets(rec.plan.K_tilde)
            if rec.plan.K_tilde is not None
            else [],
            "D_new": _triplets(rec.investment.D_new, tol=1e-15),
            "lp_status": "scaled" if rec.investment.scaled else "optimal",
            "scale": rec.investment.scale,
            "clamped": [int(i) for i in rec.investment.clamped],
        }
        doc["steps"].append(entry)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
