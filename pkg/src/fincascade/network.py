"""Financial network data model, validation, generators, and file I/O.

A network couples ``n`` companies through a cross-holdings matrix and
``m`` external assets through a share matrix.  ``cross_holdings[i, j]``
is the fraction of company ``j`` owned by company ``i``; the externally
held fraction of each company (one minus its column sum) must stay
strictly positive.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidSpec,
    NetworkFormatError,
    NonPositiveExternalFraction,
)

# Matching tolerance for "nonnegative" entries read from files.
_NEG_TOL = 0.0
# Row sums of the asset share matrix may exceed one only by roundoff.
_ROW_SUM_SLACK = 1e-12


@dataclass
class FinancialNetwork:
    """Company/asset network with failure parameters.

    Attributes
    ----------
    cross_holdings : (n, n) ndarray
        Nonnegative, zero diagonal, every column sum below one.
    asset_shares : (n, m) ndarray
        Nonnegative, row sums at most one.
    prices : (m,) ndarray
        Strictly positive asset prices.
    thresholds : (n,) ndarray
        Failure thresholds on market value.
    failure_cost : float
        Nonnegative one-step penalty charged while below threshold.
    """

    cross_holdings: np.ndarray
    asset_shares: np.ndarray
    prices: np.ndarray
    thresholds: np.ndarray
    failure_cost: float

    def __post_init__(self):
        self.cross_holdings = np.ascontiguousarray(self.cross_holdings, dtype=np.float64)
        self.asset_shares = np.ascontiguousarray(self.asset_shares, dtype=np.float64)
        self.prices = np.ascontiguousarray(self.prices, dtype=np.float64)
        self.thresholds = np.ascontiguousarray(self.thresholds, dtype=np.float64)
        self.failure_cost = float(self.failure_cost)

    @property
    def n_companies(self):
        return self.cross_holdings.shape[0]

    @property
    def n_assets(self):
        return self.asset_shares.shape[1]

    def external_income(self):
        """Per-company income from external assets, ``asset_shares @ prices``."""
        return self.asset_shares @ self.prices


def validate(net):
    """Return a list of human-readable invariant violations (empty when valid)."""
    problems = []
    C = net.cross_holdings
    D = net.asset_shares
    n = C.shape[0]
    if C.ndim != 2 or C.shape[1] != n:
        problems.append(f"cross_holdings must be square, got {C.shape}")
        return problems
    if D.ndim != 2 or D.shape[0] != n:
        problems.append(
            f"asset_shares must have one row per company, got {D.shape} for n={n}"
        )
        return problems
    if net.prices.shape != (D.shape[1],):
        problems.append(
            f"prices must have one entry per asset, got {net.prices.shape}"
        )
        return problems
    if net.thresholds.shape != (n,):
        problems.append(
            f"thresholds must have one entry per company, got {net.thresholds.shape}"
        )
        return problems
    if not np.isfinite(C).all():
        problems.append("cross_holdings has non-finite entries")
    if not np.isfinite(D).all():
        problems.append("asset_shares has non-finite entries")
    if not (np.isfinite(net.prices).all() and np.isfinite(net.thresholds).all()):
        problems.append("prices or thresholds have non-finite entries")
    if problems:
        return problems

    neg = np.argwhere(C < _NEG_TOL)
    for i, j in neg[:10]:
        problems.append(f"cross_holdings[{i},{j}] = {C[i, j]} is negative")
    diag = np.flatnonzero(np.diagonal(C) != 0.0)
    for i in diag[:10]:
        problems.append(f"cross_holdings[{i},{i}] = {C[i, i]} must be zero")
    col = C.sum(axis=0)
    bad_cols = np.flatnonzero(col >= 1.0)
    for j in bad_cols[:10]:
        problems.append(f"column sum {col[j]} of cross_holdings[:, {j}] reaches 1")
    negd = np.argwhere(D < _NEG_TOL)
    for i, j in negd[:10]:
        problems.append(f"asset_shares[{i},{j}] = {D[i, j]} is negative")
    rows = D.sum(axis=1)
    bad_rows = np.flatnonzero(rows > 1.0 + _ROW_SUM_SLACK)
    for i in bad_rows[:10]:
        problems.append(f"row sum {rows[i]} of asset_shares[{i}, :] exceeds 1")
    bad_p = np.flatnonzero(net.prices <= 0.0)
    for j in bad_p[:10]:
        problems.append(f"prices[{j}] = {net.prices[j]} must be positive")
    if net.failure_cost < 0.0:
        problems.append(f"failure_cost {net.failure_cost} must be nonnegative")
    return problems


def external_fractions(net):
    """Externally held fraction of each company, one minus the column sums.

    Raises :class:`NonPositiveExternalFraction` when any company is fully
    owned by the others.
    """
    frac = 1.0 - net.cross_holdings.sum(axis=0)
    bad = np.flatnonzero(frac <= 0.0)
    if bad.size:
        raise NonPositiveExternalFraction(
            f"companies {bad.tolist()} have externally held fraction <= 0"
        )
    return frac


@dataclass
class NetworkGenSpec:
    """Cross-holdings generator parameters.

    ``kind`` is ``"uniform"`` (independent links with probability
    ``link_prob``) or ``"powerlaw"`` (out-degrees drawn from a truncated
    power law with the given ``exponent``).  ``weight`` defaults to
    ``1 / (10 n)``.
    """

    kind: str
    n: int
    link_prob: float = 0.2
    exponent: float = 2.1
    weight: float | None = None
    seed: int = 0

    def resolved_weight(self):
        return 1.0 / (10.0 * self.n) if self.weight is None else float(self.weight)


@dataclass
class GeneratedHoldings:
    cross_holdings: np.ndarray
    mean_out_degree: float
    weight_scale: float = 1.0


def _check_gen_spec(spec):
    if spec.kind not in ("uniform", "powerlaw"):
        raise InvalidSpec(f"unknown generator kind {spec.kind!r}")
    if spec.n < 2:
        raise InvalidSpec("generator needs at least two companies")
    if spec.kind == "uniform" and not (0.0 <= spec.link_prob <= 1.0):
        raise InvalidSpec(f"link_prob {spec.link_prob} outside [0, 1]")
    if spec.kind == "powerlaw" and spec.exponent <= 1.0:
        raise InvalidSpec(f"power-law exponent {spec.exponent} must exceed 1")
    if spec.resolved_weight() <= 0.0:
        raise InvalidSpec("link weight must be positive")


def generate_cross_holdings(spec):
    """Draw a cross-holdings matrix from ``spec``; deterministic per seed.

    If a column sum would reach one the whole matrix is rescaled, keeping
    the weights homogeneous; the applied factor is reported.
    """
    _check_gen_spec(spec)
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    w = spec.resolved_weight()
    C = np.zeros((n, n))
    if spec.kind == "uniform":
        mask = rng.random((n, n)) < spec.link_prob
        np.fill_diagonal(mask, False)
        C[mask] = w
    else:
        kappa = np.arange(1, n, dtype=np.float64)
        pmf = kappa ** (-spec.exponent)
        cdf = np.cumsum(pmf / pmf.sum())
        degrees = np.searchsorted(cdf, rng.random(n)) + 1
        for i in range(n):
            targets = rng.choice(n - 1, size=int(degrees[i]), replace=False)
            targets = targets + (targets >= i)
            C[i, targets] = w
    scale = 1.0
    col_max = C.sum(axis=0).max()
    if col_max >= 1.0:
        scale = 0.98 / col_max
        C *= scale
    mean_deg = float((C > 0.0).sum(axis=1).mean())
    return GeneratedHoldings(C, mean_deg, scale)


def _triplets(M):
    out = []
    for i, j in np.argwhere(M != 0.0):
        out.append([int(i), int(j), float(M[i, j])])
    return out


def _from_triplets(triplets, shape, what):
    M = np.zeros(shape)
    seen = set()
    for entry in triplets:
        if len(entry) != 3:
            raise NetworkFormatError(f"{what} entry {entry!r} is not [i, j, value]")
        i, j, v = int(entry[0]), int(entry[1]), float(entry[2])
        if not (0 <= i < shape[0] and 0 <= j < shape[1]):
            raise NetworkFormatError(f"{what} index ({i}, {j}) out of range for {shape}")
        if (i, j) in seen:
            raise NetworkFormatError(f"duplicate {what} entry at ({i}, {j})")
        seen.add((i, j))
        M[i, j] = v
    return M


def save_network(net, path):
    """Write a network to a JSON file with sparse 0-based triplets."""
    doc = {
        "n": net.n_companies,
        "m": net.n_assets,
        "beta": net.failure_cost,
        "p": [float(v) for v in net.prices],
        "v_lo": [float(v) for v in net.thresholds],
        "C": _triplets(net.cross_holdings),
        "D": _triplets(net.asset_shares),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_network(path):
    """Read a network written by :func:`save_network`.

    Rejects duplicate triplets and out-of-range indices; values round-trip
    bit-exactly through the JSON float representation.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NetworkFormatError(f"not valid JSON: {exc}") from exc
    try:
        n = int(doc["n"])
        m = int(doc["m"])
        beta = float(doc["beta"])
        p = np.asarray(doc["p"], dtype=np.float64)
        v_lo = np.asarray(doc["v_lo"], dtype=np.float64)
        c_trip = doc["C"]
        d_trip = doc["D"]
    except KeyError as exc:
        raise NetworkFormatError(f"missing key {exc}") from exc
    if p.shape != (m,) or v_lo.shape != (n,):
        raise NetworkFormatError(
            f"expected p of length {m} and v_lo of length {n}, got {p.shape} and {v_lo.shape}"
        )
    C = _from_triplets(c_trip, (n, n), "C")
    D = _from_triplets(d_trip, (n, m), "D")
    return FinancialNetwork(C, D, p, v_lo, beta)
