"""Biased and unbiased estimation of Pauli expectation values from snapshots.

The single-qubit estimator channel reconstructs ``3*sqrt(1-eps)*rho +
(1 - 3*sqrt(1-eps))/2 * I`` from each measured projector.  At ``eps = 0``
this is the familiar unbiased ``3*rho - I``; for ``eps > 0`` the Bloch
sphere is dilated by less than 3, shrinking estimates toward the maximally
mixed state.  For a weight-w observable the induced global rescale ``alpha``
of the mean estimate satisfies ``1 - alpha = (1 - eps)**(w/2)``.
"""

import itertools
import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .pauli import PAULI_1Q, PauliString
from .sampling import ShadowCollection, Snapshot

_LETTERS = "IXYZ"


def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    return epsilon


def alpha_from_epsilon(epsilon: float, w: int) -> float:
    """Global rescale of a weight-w mean estimate: 1 - (1-eps)^(w/2)."""
    return 1.0 - (1.0 - _check_epsilon(epsilon)) ** (w / 2)


def epsilon_from_alpha(alpha: float, w: int) -> float:
    """Per-qubit bias reproducing a global rescale alpha on weight w."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if w < 1:
        raise ValueError("weight must be at least 1 to invert the rescale")
    return 1.0 - (1.0 - alpha) ** (2.0 / w)


@dataclass(frozen=True)
class BiasSpec:
    """Per-qubit channel bias eps in [0, 1]; eps = 0 is the unbiased channel."""

    epsilon: float = 0.0

    def __post_init__(self):
        _check_epsilon(self.epsilon)

    @classmethod
    def from_alpha(cls, alpha: float, w: int) -> "BiasSpec":
        return cls(epsilon_from_alpha(alpha, w))

    def scale(self, w: int) -> float:
        """Mean rescale factor (1-eps)^(w/2) for a weight-w observable."""
        return (1.0 - self.epsilon) ** (w / 2)

    def alpha(self, w: int) -> float:
        return 1.0 - self.scale(w)


@dataclass(frozen=True)
class EstimateReport:
    """Sample-mean estimate of one Pauli expectation value."""

    value: float
    n_samples: int
    empirical_variance: float  # unbiased (n-1) single-shot sample variance
    epsilon: float
    alpha: float
    variance_defined: bool = True  # False when n_samples == 1

    def to_json(self) -> str:
        return json.dumps({
            "value": self.value,
            "n_samples": self.n_samples,
            "empirical_variance": self.empirical_variance,
            "epsilon": self.epsilon,
            "alpha": self.alpha,
        })


def _as_bias(epsilon) -> BiasSpec:
    if isinstance(epsilon, BiasSpec):
        return epsilon
    return BiasSpec(_check_epsilon(epsilon))


def biased_local_channel(rho1: np.ndarray, epsilon: float) -> np.ndarray:
    """Apply 3*sqrt(1-eps)*rho + (1 - 3*sqrt(1-eps))/2 * I to a 1-qubit state."""
    epsilon = _check_epsilon(epsilon)
    rho1 = np.asarray(rho1, dtype=complex)
    if rho1.shape != (2, 2):
        raise ValueError(f"expected a 2x2 density matrix, got shape {rho1.shape}")
    s3 = 3.0 * np.sqrt(1.0 - epsilon)
    return s3 * rho1 + 0.5 * (1.0 - s3) * np.eye(2)


def snapshot_pauli_estimate(snapshot: Snapshot, p: PauliString, epsilon: float = 0.0) -> float:
    """Single-shot estimate of tr(P rho) from one snapshot.

    Zero when any non-identity letter of P disagrees with the measured
    basis on that qubit, else coefficient * (3*sqrt(1-eps))^w * prod of
    outcome signs over the support.
    """
    epsilon = _check_epsilon(epsilon)
    if p.n != snapshot.n:
        raise ValueError(f"qubit count mismatch: snapshot has {snapshot.n}, observable has {p.n}")
    sign = 1
    for q in p.support:
        if snapshot.bases[q] != _LETTERS.index(p.letters[q]) - 1:
            return 0.0
        if snapshot.outcomes[q] == 1:
            sign = -sign
    return p.coefficient * (3.0 * np.sqrt(1.0 - epsilon)) ** p.weight * sign


def _observable_arrays(observables, n):
    """Padded (sites, letters) kernel arrays; letter 0 marks padding."""
    wmax = max(1, max(p.weight for p in observables))
    m = len(observables)
    sites = np.zeros((m, wmax), dtype=np.int64)
    letters = np.zeros((m, wmax), dtype=np.uint8)
    for i, p in enumerate(observables):
        if p.n != n:
            raise ValueError(f"observable acts on {p.n} qubits, collection has {n}")
        supp = p.support
        sites[i, :len(supp)] = supp
        letters[i, :len(supp)] = p.letter_codes()
    return sites, letters


def match_counts(collection: ShadowCollection, observables) -> tuple:
    """(sum of outcome signs, match count) per observable, as exact integers."""
    sites, letters = _observable_arrays(observables, collection.n)
    s_sum, count = _kernels.match_stats(collection.bases, collection.outcomes,
                                        sites, letters)
    return s_sum, count


def mean_from_counts(sign_sum: int, n_samples: int, w: int, coefficient: float,
                     epsilon: float) -> float:
    """Mean estimate from integer match statistics.

    Computed as (1-eps)^(w/2) times the eps=0 mean so that biasing is an
    exact rescale of the unbiased estimate on the same data.
    """
    unbiased = coefficient * 3.0 ** w * (sign_sum / n_samples)
    return (1.0 - epsilon) ** (w / 2) * unbiased


def mean_pauli_estimate(collection: ShadowCollection, p: PauliString,
                        epsilon: float = 0.0) -> EstimateReport:
    """Sample mean and variance of the single-shot estimates over a collection."""
    bias = _as_bias(epsilon)
    s_sum, count = match_counts(collection, [p])
    n_s = collection.n_snapshots
    w = p.weight
    value = mean_from_counts(int(s_sum[0]), n_s, w, p.coefficient, bias.epsilon)
    scale = bias.scale(w)
    if n_s == 1:
        return EstimateReport(value, 1, 0.0, bias.epsilon, 1.0 - scale,
                              variance_defined=False)
    # single-shot values are +-(coefficient * 3^w * scale) on matches, 0 otherwise
    gsq = (p.coefficient * 3.0 ** w * scale) ** 2
    var = (gsq * int(count[0]) - n_s * value * value) / (n_s - 1)
    return EstimateReport(value, n_s, max(var, 0.0), bias.epsilon, 1.0 - scale)


def reduced_density_estimate(collection: ShadowCollection, qubits,
                             epsilon: float = 0.0) -> np.ndarray:
    """Shadow estimate of the reduced density matrix on up to 3 qubits.

    Equals the snapshot average of the tensor product of per-qubit
    estimator-channel reconstructions, computed through the Pauli expansion
    rho = 2^-k sum_P <P> sigma_P.  Hermitian and unit trace by construction;
    not necessarily positive.
    """
    bias = _as_bias(epsilon)
    qubits = list(qubits)
    n = collection.n
    if not qubits or len(qubits) > 3:
        raise ValueError("qubits must contain between 1 and 3 indices")
    if len(set(qubits)) != len(qubits) or any(not 0 <= q < n for q in qubits):
        raise ValueError(f"invalid qubit indices {qubits} for n={n}")
    k = len(qubits)
    observables = []
    combos = []
    for codes in itertools.product(range(4), repeat=k):
        if all(c == 0 for c in codes):
            continue
        supp = [(qubits[t], _LETTERS[c]) for t, c in enumerate(codes) if c != 0]
        observables.append(PauliString.from_sites(
            n, [q for q, _ in supp], [c for _, c in supp]))
        combos.append(codes)
    s_sum, _ = match_counts(collection, observables)
    n_s = collection.n_snapshots
    rho = np.eye(1 << k, dtype=complex)
    for codes, s in zip(combos, s_sum):
        w = sum(1 for c in codes if c != 0)
        mean = mean_from_counts(int(s), n_s, w, 1.0, bias.epsilon)
        mat = np.eye(1, dtype=complex)
        for c in reversed(codes):  # reduced qubit t is bit t of the row index
            mat = np.kron(mat, PAULI_1Q[_LETTERS[c]])
        rho = rho + mean * mat
    return rho / (1 << k)


def plugin_alpha_star(collection: ShadowCollection, p: PauliString,
                      use_empirical_variance: bool = False) -> float:
    """Data-driven estimate of the optimal global rescale alpha*.

    Plugs the clamped empirical mean m into the closed-form SNR
    beta = N_s / (3^w / m^2 - 1) and returns 1 / (1 + beta); m = 0 maps to
    alpha* = 1 (estimate fully shrunk).  With ``use_empirical_variance`` the
    sample variance replaces the theoretical 3^w - m^2.
    """
    report = mean_pauli_estimate(collection, p, 0.0)
    n_s = report.n_samples
    m = min(1.0, max(-1.0, report.value))
    if m == 0.0:
        return 1.0
    if use_empirical_variance:
        if report.empirical_variance <= 0.0:
            return 0.0
        beta_hat = n_s * m * m / report.empirical_variance
    else:
        denom = 3.0 ** p.weight - m * m
        if denom <= 0.0:
            return 0.0
        beta_hat = n_s * m * m / denom
    return 1.0 / (1.0 + beta_hat)
