"""Closed-form and semi-analytic performance predictions for biased shadows.

Covers the single-shot average-case loss of a single-qubit reconstruction
and its minimizer, the exact binomial worst-case MSE of weight-w Pauli
expectation estimates, the Monte-Carlo best-case MSE, and the SNR /
optimal-bias algebra for rescaled mean estimators.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels

#: largest N_s for which the exact binomial sum is evaluated term by term
EXACT_SUM_LIMIT = 100_000

_MASK64 = (1 << 64) - 1


# ---------------------------------------------------------------------------
# average-case loss of the biased single-qubit reconstruction


def average_loss(r_norm: float, epsilon: float) -> float:
    """Expected single-shot loss E tr[(rho - rho_hat)^2] for Bloch norm ``r_norm``.

    Closed form (quadratic in sqrt(1-eps)):
    (r^2 + 9(1-eps))/2 - sqrt(1-eps) * r^2.
    """
    r_norm = float(r_norm)
    epsilon = float(epsilon)
    if not 0.0 <= r_norm <= 1.0:
        raise ValueError(f"r_norm must lie in [0, 1], got {r_norm}")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    rsq = r_norm * r_norm
    return 0.5 * (rsq + 9.0 * (1.0 - epsilon)) - math.sqrt(1.0 - epsilon) * rsq


def eps_min(r_norm: float) -> tuple:
    """Minimizer of the average loss and its value.

    sqrt(1 - eps_min) = r^2 / 9, so eps_min = 1 - r^4/81 and the minimum
    loss is r^2 (9 - r^2) / 18.
    """
    r_norm = float(r_norm)
    if not 0.0 <= r_norm <= 1.0:
        raise ValueError(f"r_norm must lie in [0, 1], got {r_norm}")
    rsq = r_norm * r_norm
    return 1.0 - rsq * rsq / 81.0, rsq * (9.0 - rsq) / 18.0


# ---------------------------------------------------------------------------
# worst case: eigenstate of the observable, tr(O rho) = +1


def _check_weight(w) -> int:
    if int(w) != w or w < 1:
        raise ValueError(f"weight must be a positive integer, got {w}")
    return int(w)


@lru_cache(maxsize=64)
def _binomial_pmf(n_s: int, w: int) -> np.ndarray:
    """B(n_s, 3^-w) pmf over k = 0..n_s.

    Multiplicative recurrence pmf(k+1)/pmf(k) = (n_s-k)/(k+1) * p/(1-p),
    carried in log space so the start value (1-p)^n_s cannot underflow.
    """
    p = 1.0 / 3.0 ** w
    k = np.arange(1.0, n_s + 1.0)
    incr = math.log(p) - math.log1p(-p) + np.log(n_s - k + 1.0) - np.log(k)
    logpmf = np.empty(n_s + 1)
    logpmf[0] = n_s * math.log1p(-p)
    logpmf[1:] = logpmf[0] + np.cumsum(incr)
    pmf = np.exp(logpmf)
    pmf.flags.writeable = False
    return pmf


def worst_case_mse(w: int, n_s: int, epsilon: float) -> float:
    """Exact mean squared error sum_k B(n_s,3^-w)(k) (3^w (1-eps)^(w/2) k/n_s - 1)^2.

    At eps = 0 this reduces to the moment identity (3^w - 1)/n_s.  Raises
    for n_s beyond EXACT_SUM_LIMIT; use :func:`worst_case_mse_closed` there.
    """
    w = _check_weight(w)
    if n_s < 1:
        raise ValueError("n_s must be at least 1")
    if n_s > EXACT_SUM_LIMIT:
        raise ValueError(
            f"n_s={n_s} exceeds the exact-sum limit {EXACT_SUM_LIMIT}; "
            "request worst_case_mse_closed instead"
        )
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    pmf = _binomial_pmf(int(n_s), w)
    g = 3.0 ** w * (1.0 - epsilon) ** (w / 2) / n_s
    k = np.arange(n_s + 1.0)
    return math.fsum(pmf * (g * k - 1.0) ** 2)


def worst_case_mse_closed(w: int, n_s: int, epsilon: float) -> float:
    """Second-moment form of the worst-case MSE, valid for any n_s.

    With rescale 1-alpha = (1-eps)^(w/2), the MSE decomposes into
    (1-eps)^w (3^w - 1)/n_s + alpha^2.
    """
    w = _check_weight(w)
    if n_s < 1:
        raise ValueError("n_s must be at least 1")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    alpha = 1.0 - (1.0 - epsilon) ** (w / 2)
    return (1.0 - epsilon) ** w * (3.0 ** w - 1.0) / n_s + alpha * alpha


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_worst_case(w: int, n_s: int, grid_points: int = 1000,
                        tol: float = 1e-10) -> tuple:
    """(eps*, mse*) minimizing the exact worst-case MSE over eps in [0, 1].

    Dense grid scan followed by golden-section refinement; the curve is
    smooth and unimodal in sqrt(1-eps).
    """
    grid = np.linspace(0.0, 1.0, grid_points + 1)
    values = [worst_case_mse(w, n_s, e) for e in grid]
    i0 = int(np.argmin(values))
    lo = grid[max(i0 - 1, 0)]
    hi = grid[min(i0 + 1, grid_points)]
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1 = worst_case_mse(w, n_s, x1)
    f2 = worst_case_mse(w, n_s, x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = worst_case_mse(w, n_s, x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = worst_case_mse(w, n_s, x2)
    best = min((values[i0], grid[i0]), (f1, x1), (f2, x2))
    return best[1], best[0]


# ---------------------------------------------------------------------------
# best case: tr(O rho) = 0, Monte Carlo over the per-shot three-point law


@lru_cache(maxsize=64)
def _best_case_moments(w: int, n_s: int, reps: int, seed: int) -> tuple:
    counts = _kernels.best_case_counts(w, n_s, reps, np.uint64(seed & _MASK64))
    ksq = counts.astype(np.float64) ** 2
    return float(ksq.mean()), float(ksq.std(ddof=1) / math.sqrt(reps))


def best_case_mse(w: int, n_s: int, epsilon: float, reps: int = 100_000,
                  seed: int = 0) -> tuple:
    """Monte-Carlo (mse, standard_error) of the biased estimate of a zero mean.

    Per shot the estimator yields +-1 with probability 3^-w / 2 each and 0
    otherwise; the reported error is (3^w (1-eps)^(w/2) k / n_s)^2 averaged
    over ``reps`` seeded repetitions of the N_s-shot sum k.  The bias enters
    only as the deterministic factor (1-eps)^w, so for a fixed seed the
    curve in eps is an exact rescale.
    """
    w = _check_weight(w)
    if n_s < 1:
        raise ValueError("n_s must be at least 1")
    if reps < 1000:
        raise ValueError(f"reps must be at least 1000, got {reps}")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    mean_ksq, se_ksq = _best_case_moments(w, int(n_s), int(reps), int(seed))
    base = (3.0 ** w / n_s) ** 2
    scale = (1.0 - epsilon) ** w
    return scale * (base * mean_ksq), scale * (base * se_ksq)


# ---------------------------------------------------------------------------
# SNR and optimal rescale of a general mean estimator


@dataclass(frozen=True)
class SnrReport:
    """Signal-to-noise ratio and optimal-bias summary of a mean estimator."""

    beta: float            # mean^2 / (variance / n_s)
    alpha_star: float      # optimal rescale amount, 1/(1+beta)
    alpha_critical: float  # largest non-harmful rescale, 2*alpha_star
    mse_unbiased: float    # variance / n_s
    mse_at_alpha_star: float
    gain: float            # relative SNR gain 1 + 1/beta

    def to_json(self) -> str:
        import json
        return json.dumps({
            "beta": self.beta,
            "alpha_star": self.alpha_star,
            "alpha_critical": self.alpha_critical,
            "mse_unbiased": self.mse_unbiased,
            "mse_at_alpha_star": self.mse_at_alpha_star,
            "gain": self.gain,
        })


def biased_mse(mean: float, variance: float, n_s: int, alpha: float) -> float:
    """MSE of the rescaled mean estimator (1-alpha) R-bar.

    Bias-variance decomposition: alpha^2 mean^2 + (1-alpha)^2 variance/n_s.
    """
    if variance < 0.0:
        raise ValueError("variance must be nonnegative")
    if n_s < 1:
        raise ValueError("n_s must be at least 1")
    return alpha * alpha * mean * mean + (1.0 - alpha) ** 2 * variance / n_s


def snr(mean: float, variance: float, n_s: int) -> SnrReport:
    """SNR report of an N_s-sample mean with the given single-shot variance."""
    mean = float(mean)
    variance = float(variance)
    if variance < 0.0:
        raise ValueError("variance must be nonnegative")
    if n_s < 1:
        raise ValueError("n_s must be at least 1")
    if mean == 0.0 and variance == 0.0:
        raise ValueError("degenerate estimator: mean and variance both zero")
    q = variance / n_s
    if mean == 0.0:
        beta = 0.0
    elif q == 0.0:
        beta = math.inf
    else:
        beta = mean * mean / q
    alpha_star = 1.0 / (1.0 + beta)
    gain = math.inf if beta == 0.0 else 1.0 + 1.0 / beta
    return SnrReport(
        beta=beta,
        alpha_star=alpha_star,
        alpha_critical=2.0 * alpha_star,
        mse_unbiased=q,
        mse_at_alpha_star=alpha_star * mean * mean,
        gain=gain,
    )


def shadow_snr(w: int, expval: float, n_s: int) -> SnrReport:
    """SNR of the weight-w Pauli shadow estimator with true mean ``expval``.

    Uses the shadow variance law Var = 3^w - expval^2, giving
    beta = n_s (3^w / expval^2 - 1)^-1.
    """
    if int(w) != w or w < 0:
        raise ValueError(f"weight must be a nonnegative integer, got {w}")
    expval = float(expval)
    if not -1.0 <= expval <= 1.0:
        raise ValueError(f"expval must lie in [-1, 1], got {expval}")
    return snr(expval, 3.0 ** int(w) - expval * expval, n_s)


# ---------------------------------------------------------------------------
# CLI-facing table emitters


def loss_curve_rows(r_norms, epsilons):
    """Rows (epsilon, r_norm, loss) for the average-loss curves."""
    return [(float(e), float(r), average_loss(r, e))
            for r in r_norms for e in epsilons]


def worst_case_rows(ws, n_ss, epsilons, closed_form: bool = False):
    """Rows (epsilon, w, n_s, mse, relative_mse) for the worst-case curves."""
    fn = worst_case_mse_closed if closed_form else worst_case_mse
    rows = []
    for w in ws:
        for n_s in n_ss:
            base = fn(w, n_s, 0.0)
            for e in epsilons:
                mse = fn(w, n_s, e)
                rows.append((float(e), int(w), int(n_s), mse, mse / base))
    return rows


def best_case_rows(ws, n_ss, epsilons, reps: int = 100_000, seed: int = 0):
    """Rows (epsilon, w, n_s, mse, standard_error, relative_mse).

    Every epsilon of one (w, n_s) curve shares the seed (common random
    numbers), so the relative column is an exact (1-eps)^w rescale.
    """
    rows = []
    for w in ws:
        for n_s in n_ss:
            base, _ = best_case_mse(w, n_s, 0.0, reps, seed)
            for e in epsilons:
                mse, se = best_case_mse(w, n_s, e, reps, seed)
                rel = mse / base if base > 0.0 else math.nan
                rows.append((float(e), int(w), int(n_s), mse, se, rel))
    return rows
