"""Cascade-size estimation for large homogeneous holding networks.

The pipeline turns per-company offset levels into integer safety
thresholds (how many failed counterparties a company tolerates), counts
how many companies a hypothetical cascade of size tau would leave
vulnerable, and reports the largest self-consistent tau as an upper
bound estimate of the terminal failure count.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import orthant_system, simulate
from .errors import DegenerateScale, HeterogeneousWeights

WEIGHT_SPREAD_TOL = 1e-12


@dataclass
class LargeNetParams:
    """Homogeneous-network parameters backing an estimate.

    ``alpha`` is the common holding weight, ``theta_tilde`` the
    per-company link probability (degree over n), ``xi_bar`` the assumed
    uniform bound on failed-state magnitudes, ``theta_global`` the share
    of companies failed in the signature the offsets were evaluated at.
    """

    alpha: float
    theta_tilde: np.ndarray
    xi_bar: float
    degrees: np.ndarray
    theta_global: float = 0.0

    def __post_init__(self):
        self.theta_tilde = np.ascontiguousarray(self.theta_tilde, dtype=np.float64)
        self.degrees = np.ascontiguousarray(self.degrees, dtype=np.int64)
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("holding weight must lie in (0, 1)")
        if ((self.theta_tilde < 0.0) | (self.theta_tilde > 1.0)).any():
            raise ValueError("link probabilities must lie in [0, 1]")
        if self.xi_bar < 0.0:
            raise ValueError("failed-state bound must be nonnegative")
        n = self.theta_tilde.shape[0]
        if np.abs(self.degrees - self.theta_tilde * n).max() > 1e-9:
            raise ValueError("degrees and link probabilities disagree")


@dataclass
class CascadeEstimate:
    k_hat: np.ndarray
    F_values: np.ndarray
    estimate: int
    params: LargeNetParams | None = None


def safety_threshold(b, alpha, xi_bar):
    """Largest number of failed counterparties a company with offset
    ``b`` survives when each costs ``alpha * xi_bar``.

    Accepts scalars or arrays; returns int64.
    """
    if alpha * xi_bar == 0.0:
        raise DegenerateScale("holding weight times failed-state bound is zero")
    k = np.floor(np.asarray(b, dtype=np.float64) / (alpha * xi_bar)).astype(np.int64)
    if k.ndim == 0:
        return int(k)
    return k


def binom_tail(delta, theta, k_hat):
    """Probability that at most ``k_hat`` of ``delta`` independent links
    fail when each fails with probability ``theta``.

    Log-domain coefficients keep delta up to 1e4 exact enough; the sum
    is clamped to 1 against rounding overshoot.
    """
    delta = int(delta)
    k = int(k_hat)
    if delta < 0:
        raise ValueError("link count must be nonnegative")
    if k < 0:
        return 0.0
    k = min(k, delta)
    if theta <= 0.0:
        return 1.0
    if theta >= 1.0:
        return 1.0 if k >= delta else 0.0
    lg_top = math.lgamma(delta + 1)
    j = np.arange(k + 1)
    lg_j = np.array([math.lgamma(v + 1.0) for v in j])
    lg_rest = np.array([math.lgamma(delta - v + 1.0) for v in j])
    logs = lg_top - lg_j - lg_rest
    logs = logs + j * math.log(theta) + (delta - j) * math.log1p(-theta)
    return min(float(np.exp(logs).sum()), 1.0)


def count_function(k_hat, theta_tilde):
    """Vulnerable-company counts F(tau) for tau = 0..n.

    F(tau) counts companies whose safety threshold falls short of the
    expected failed links, ``k_hat_i < theta_tilde_i * tau``.
    """
    k_hat = np.asarray(k_hat, dtype=np.float64)
    theta_tilde = np.asarray(theta_tilde, dtype=np.float64)
    n = k_hat.shape[0]
    taus = np.arange(n + 1, dtype=np.float64)
    fires = k_hat[None, :] < theta_tilde[None, :] * taus[:, None]
    return fires.sum(axis=1).astype(np.int64)


def estimate_failures(F_values):
    """Largest tau whose vulnerable count sustains it: max{tau : F(tau) >= tau}."""
    F_values = np.asarray(F_values)
    taus = np.arange(F_values.shape[0])
    return int(np.flatnonzero(F_values >= taus).max())


def _homogeneous_weight(C, force_mean):
    weights = C[C > 0.0]
    top = weights.max()
    if (top - weights.min()) > WEIGHT_SPREAD_TOL * top and not force_mean:
        raise HeterogeneousWeights(
            "holding weights differ; pass force_mean_weight=True to use their mean"
        )
    return float(weights.mean())


def estimate_from_network(
    net,
    ext_frac,
    signs=None,
    xi_bar=None,
    x0=None,
    pilot_horizon=200,
    force_mean_weight=False,
):
    """Full estimation pipeline for one network and signature.

    Offsets come from the orthant system at ``signs`` (all-healthy when
    omitted).  When ``xi_bar`` is not given, a pilot simulation from
    ``x0`` supplies it as the worst terminal failed-state magnitude; a
    pilot with no failures marks every nonnegative-offset company safe
    outright.
    """
    n = net.n_companies
    if signs is None:
        signs = np.ones(n)
    signs = np.asarray(signs, dtype=np.float64)
    C = net.cross_holdings
    b = orthant_system(net, ext_frac, signs).offset
    degrees = np.count_nonzero(C, axis=1).astype(np.int64)
    theta_tilde = degrees / float(n)
    theta_global = float((signs < 0.0).sum()) / n

    if degrees.sum() == 0:
        # no links: a company is vulnerable only if its own offset fails
        k_hat = np.where(b >= 0.0, n, -1).astype(np.int64)
        F = count_function(k_hat, theta_tilde)
        return CascadeEstimate(k_hat, F, estimate_failures(F), None)

    alpha = _homogeneous_weight(C, force_mean_weight)
    if xi_bar is None:
        if x0 is None:
            raise ValueError("need xi_bar or a pilot start state x0")
        pilot = simulate(net, ext_frac, x0, pilot_horizon)
        terminal = pilot.errors[-1]
        fallen = terminal < 0.0
        if not fallen.any():
            k_hat = np.where(b >= 0.0, n, -1).astype(np.int64)
            F = count_function(k_hat, theta_tilde)
            params = LargeNetParams(alpha, theta_tilde, 0.0, degrees, theta_global)
            return CascadeEstimate(k_hat, F, estimate_failures(F), params)
        xi_bar = float(-terminal[fallen].min())
    xi_bar = float(xi_bar)

    k_hat = safety_threshold(b, alpha, xi_bar)
    F = count_function(k_hat, theta_tilde)
    params = LargeNetParams(alpha, theta_tilde, xi_bar, degrees, theta_global)
    return CascadeEstimate(k_hat, F, estimate_failures(F), params)


def survival_probabilities(est, per_company=False):
    """Chance each company would ride out a cascade of the estimated size.

    The failed-link probability is the global failed share by default;
    ``per_company=True`` switches to each company's own link probability.
    Companies with negative thresholds get probability zero.
    """
    if est.params is None:
        return np.where(est.k_hat >= 0, 1.0, 0.0)
    params = est.params
    out = np.empty(est.k_hat.shape[0])
    for i in range(out.shape[0]):
        theta = params.theta_tilde[i] if per_company else params.theta_global
        out[i] = binom_tail(int(params.degrees[i]), float(theta), int(est.k_hat[i]))
    return out


def write_estimate_csv(path, est):
    lines = ["tau,vulnerable"]
    for tau, count in enumerate(est.F_values):
        lines.append(f"{tau},{int(count)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def estimate_summary(est):
    values, counts = np.unique(est.k_hat, return_counts=True)
    return {
        "estimate": int(est.estimate),
        "k_hat_histogram": [[int(v), int(c)] for v, c in zip(values, counts)],
    }


def write_estimate_summary(path, est):
    with open(path, "w") as fh:
        json.dump(estimate_summary(est), fh, indent=1, sort_keys=True)
        fh.write("\n")
