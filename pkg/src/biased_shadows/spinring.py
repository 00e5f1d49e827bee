"""Spin-ring demonstration: ground state, perturbation estimates, biasing gain.

The Hamiltonian is a periodic ring of n sites with on-site Z fields and
isotropic nearest-neighbour coupling,

    H = sum_k omega_k Z_k + J (X_k X_{k+1} + Y_k Y_{k+1} + Z_k Z_{k+1}),

whose ground state is obtained by exact matrix-free diagonalization.  The
experiment draws random high-weight Pauli observables with unbiased SNR
below 1, estimates them from fresh shadow collections under three biasing
strategies (none, exact optimal rescale, rescale estimated from the data)
and reports per-observable mean squared errors.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from . import _kernels
from .analytics import shadow_snr
from .estimation import _observable_arrays
from .pauli import PauliString, Statevector, exact_expectation
from .sampling import SplitMix64

_MASK64 = (1 << 64) - 1

#: Bloch z of the density-plot default state, 0.45(3)
DENSITY_DEFAULT_RZ = 34.0 / 75.0

# substream domains of a user seed (collections must not reuse the
# observable-drawing stream)
_DOMAIN_OBSERVABLES = 1
_DOMAIN_REPETITIONS = 2

_GROUND_V0_SEED = 0x5EED0F0D


@dataclass(frozen=True)
class SpinRingSpec:
    """Ring geometry and couplings; term k couples sites k and (k+1) mod n."""

    n: int
    coupling: float
    omegas: tuple
    omega_seed: int | None = None

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"spin ring needs at least 3 sites, got n={self.n}")
        if len(self.omegas) != self.n:
            raise ValueError(f"expected {self.n} on-site strengths, got {len(self.omegas)}")


@dataclass(frozen=True)
class Hamiltonian:
    """Real-coefficient Pauli-sum Hamiltonian on n qubits."""

    n: int
    terms: tuple  # of (coefficient, PauliString)

    def __post_init__(self):
        for coeff, p in self.terms:
            if p.n != self.n:
                raise ValueError(f"term {p} acts on {p.n} qubits, expected {self.n}")
            if abs(complex(coeff).imag) > 0.0:
                raise ValueError("Hamiltonian coefficients must be real")

    @cached_property
    def _kernel_arrays(self):
        coeffs = np.array(
            [coeff * p.coefficient * p.phase for coeff, p in self.terms],
            dtype=np.complex128,
        )
        xmasks = np.array([p.x_mask for _, p in self.terms], dtype=np.int64)
        zmasks = np.array([p.z_mask for _, p in self.terms], dtype=np.int64)
        return coeffs, xmasks, zmasks

    @property
    def coefficient_norm(self) -> float:
        return float(sum(abs(coeff * p.coefficient) for coeff, p in self.terms))

    def apply(self, amps: np.ndarray) -> np.ndarray:
        coeffs, xmasks, zmasks = self._kernel_arrays
        out = np.empty_like(amps)
        _kernels.apply_pauli_terms(coeffs, xmasks, zmasks, amps, out)
        return out

    def expectation(self, state: Statevector) -> float:
        return float(np.vdot(state.amplitudes, self.apply(state.amplitudes)).real)


def spin_ring_hamiltonian(spec: SpinRingSpec) -> Hamiltonian:
    """The 4n Pauli terms of the ring: n on-site Z plus 3n couplings."""
    n = spec.n
    terms = [(float(w), PauliString.from_sites(n, [k], ["Z"]))
             for k, w in enumerate(spec.omegas)]
    for k in range(n):
        nxt = (k + 1) % n
        for letter in "XYZ":
            terms.append((float(spec.coupling),
                          PauliString.from_sites(n, [k, nxt], [letter, letter])))
    return Hamiltonian(n, tuple(terms))


def build_spin_ring(n: int, coupling: float = 0.3,
                    omega_seed: int = 0) -> tuple:
    """Seeded spin ring with on-site strengths uniform in [-1, 1]."""
    if n < 3:
        raise ValueError(f"spin ring needs at least 3 sites, got n={n}")
    stream = SplitMix64(omega_seed)
    omegas = tuple(2.0 * stream.uniform() - 1.0 for _ in range(n))
    spec = SpinRingSpec(n, float(coupling), omegas, omega_seed)
    return spec, spin_ring_hamiltonian(spec)


def ground_state(ham: Hamiltonian, maxiter: int | None = None) -> tuple:
    """Lowest eigenpair of ``ham`` by shifted matrix-free Lanczos iteration.

    The operator is shifted by -c I with c the coefficient 1-norm so the
    ground state is the dominant eigenvector; the returned state fixes the
    global phase by making the largest-magnitude amplitude real positive.
    """
    if ham.n > 14:
        raise ValueError("ground_state supports at most 14 qubits")
    dim = 1 << ham.n
    shift = ham.coefficient_norm
    buf = np.empty(dim, dtype=np.complex128)

    def matvec(v):
        coeffs, xmasks, zmasks = ham._kernel_arrays
        _kernels.apply_pauli_terms(coeffs, xmasks, zmasks,
                                   np.ascontiguousarray(v, dtype=np.complex128), buf)
        return buf - shift * v

    stream = SplitMix64(_GROUND_V0_SEED)
    v0 = np.array([stream.uniform() - 0.5 for _ in range(dim)], dtype=np.complex128)
    op = LinearOperator((dim, dim), matvec=matvec, dtype=np.complex128)
    try:
        vals, vecs = eigsh(op, k=1, which="LM", v0=v0, maxiter=maxiter)
    except ArpackNoConvergence as exc:
        raise RuntimeError(f"ground-state iteration did not converge: {exc}") from exc
    energy = float(vals[0] + shift)
    psi = vecs[:, 0]
    top = int(np.argmax(np.abs(psi)))
    phase = psi[top] / abs(psi[top])
    psi = psi * np.conj(phase)
    psi /= np.linalg.norm(psi)
    residual = float(np.linalg.norm(ham.apply(psi) - energy * psi))
    if residual > 1e-8:
        raise RuntimeError(f"ground-state residual {residual:.3e} exceeds 1e-8")
    return energy, Statevector(psi)


def draw_random_observables(n: int, w: int, count: int, rng: SplitMix64):
    """``count`` weight-w strings: w distinct sites, uniform non-identity letters."""
    if not 1 <= w <= n:
        raise ValueError(f"weight must lie in [1, {n}], got {w}")
    out = []
    for _ in range(count):
        pool = list(range(n))
        sites = []
        for _ in range(w):
            sites.append(pool.pop(int(rng.uniform() * len(pool))))
        sites.sort()
        letters = ["XYZ"[int(rng.uniform() * 3.0)] for _ in sites]
        out.append(PauliString.from_sites(n, sites, letters))
    return out


@dataclass(frozen=True)
class ObservableRow:
    """Per-observable experiment outcome (MSEs with standard errors)."""

    observable: str
    true_value: float
    snr_unbiased: float
    alpha_star_exact: float
    mse_unbiased: float
    se_unbiased: float
    mse_alpha_exact: float
    se_alpha_exact: float
    mse_alpha_estimated: float
    se_alpha_estimated: float


@dataclass(frozen=True)
class ExperimentReport:
    """Fig.-4-style three-strategy comparison, rows sorted by unbiased MSE."""

    rows: tuple
    config: dict
    ground_energy: float
    draws_used: int
    filter_exhausted: bool
    low_statistics: bool

    def csv_columns(self):
        return ("observable", "true_value", "snr_unbiased", "alpha_star_exact",
                "mse_unbiased", "se_unbiased", "mse_alpha_exact", "se_alpha_exact",
                "mse_alpha_estimated", "se_alpha_estimated")

    def csv_rows(self):
        return [tuple(getattr(r, c) for c in self.csv_columns()) for r in self.rows]


def _mse_and_se(sq_errors: np.ndarray) -> tuple:
    reps = sq_errors.shape[0]
    mse = float(sq_errors.mean())
    if reps < 2:
        return mse, math.nan
    return mse, float(sq_errors.std(ddof=1) / math.sqrt(reps))


def _plugin_alphas(means_hat: np.ndarray, w: int, n_s: int) -> np.ndarray:
    """Vectorized plugin alpha*: clamp the mean, use variance 3^w - m^2."""
    m = np.clip(means_hat, -1.0, 1.0)
    denom = 3.0 ** w - m * m
    return denom / (denom + n_s * m * m)


def perturbation_experiment(spec: SpinRingSpec, n_s: int, w: int, n_obs: int,
                            repetitions: int, seed: int,
                            split_plugin: bool = False,
                            max_draw_factor: int = 50) -> ExperimentReport:
    """Three-strategy MSE comparison on random weight-w observables.

    Draws seeded random observables until ``n_obs`` of them have unbiased
    SNR below 1 at the given N_s (or the draw budget is exhausted, which is
    reported, not fatal).  Every repetition samples a fresh collection and
    produces the unbiased estimate, the estimate rescaled by the exact
    optimal alpha* (which needs the true expectation, available only in
    simulation) and the estimate rescaled by the plugin alpha* computed from
    the same data; ``split_plugin`` instead estimates alpha* on the first
    half of the snapshots and applies it to the mean of the second half.
    """
    if n_obs < 1:
        raise ValueError("n_obs must be at least 1")
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    if n_s < 2 and split_plugin:
        raise ValueError("split_plugin needs at least 2 snapshots")
    ham = spin_ring_hamiltonian(spec)
    energy, state = ground_state(ham)

    obs_rng = SplitMix64(seed, _DOMAIN_OBSERVABLES)
    selected = []
    true_values = []
    snrs = []
    draws = 0
    max_draws = max_draw_factor * n_obs
    while len(selected) < n_obs and draws < max_draws:
        (p,) = draw_random_observables(spec.n, w, 1, obs_rng)
        draws += 1
        val = exact_expectation(state, p)
        rep = shadow_snr(w, min(1.0, max(-1.0, val)), n_s)
        if rep.beta < 1.0:
            selected.append(p)
            true_values.append(val)
            snrs.append(rep)

    kernel_seed = np.uint64(
        _kernels.stream_state(np.uint64(seed & _MASK64),
                              np.uint64(_DOMAIN_REPETITIONS))
    )
    sites, letters = _observable_arrays(selected, spec.n)
    s_sum, _count, s_half, _c_half = _kernels.experiment_stats(
        state.amplitudes, spec.n, int(n_s), int(repetitions), kernel_seed,
        sites, letters)

    scale = 3.0 ** w
    means = scale * s_sum / n_s  # (reps, n_obs) unbiased estimates
    half_ns = n_s // 2
    rows = []
    for i, p in enumerate(selected):
        m_true = true_values[i]
        alpha_exact = snrs[i].alpha_star
        unb = means[:, i]
        est_exact = (1.0 - alpha_exact) * unb
        if split_plugin:
            mean_first = scale * s_half[:, i] / half_ns
            mean_second = scale * (s_sum[:, i] - s_half[:, i]) / (n_s - half_ns)
            est_plugin = (1.0 - _plugin_alphas(mean_first, w, half_ns)) * mean_second
        else:
            est_plugin = (1.0 - _plugin_alphas(unb, w, n_s)) * unb
        mse_u, se_u = _mse_and_se((unb - m_true) ** 2)
        mse_e, se_e = _mse_and_se((est_exact - m_true) ** 2)
        mse_p, se_p = _mse_and_se((est_plugin - m_true) ** 2)
        rows.append(ObservableRow(p.letters, m_true, snrs[i].beta, alpha_exact,
                                  mse_u, se_u, mse_e, se_e, mse_p, se_p))
    rows.sort(key=lambda r: r.mse_unbiased, reverse=True)

    config = {
        "n": spec.n, "coupling": spec.coupling, "omega_seed": spec.omega_seed,
        "omegas": list(spec.omegas), "n_s": int(n_s), "w": int(w),
        "n_obs": int(n_obs), "repetitions": int(repetitions), "seed": int(seed),
        "split_plugin": bool(split_plugin), "protocol_tag": "local-pauli-uniform",
    }
    return ExperimentReport(
        rows=tuple(rows), config=config, ground_energy=energy, draws_used=draws,
        filter_exhausted=len(selected) < n_obs, low_statistics=repetitions < 2,
    )


@dataclass(frozen=True)
class CombinedReport:
    """Drop / unbiased / optimally-biased estimates of tr[(H+P) rho]."""

    exact_value: float
    hamiltonian_part: float
    perturbation_part: float
    beta: float
    alpha_star: float
    mse_drop: float
    se_drop: float
    mse_unbiased: float
    se_unbiased: float
    mse_biased: float
    se_biased: float
    # paired standard errors of the per-repetition MSE differences
    diff_biased_minus_drop: float
    se_diff_biased_minus_drop: float
    diff_biased_minus_unbiased: float
    se_diff_biased_minus_unbiased: float
    config: dict = field(default_factory=dict)

    def csv_columns(self):
        return ("strategy", "mse", "standard_error")

    def csv_rows(self):
        return [("drop", self.mse_drop, self.se_drop),
                ("unbiased", self.mse_unbiased, self.se_unbiased),
                ("biased", self.mse_biased, self.se_biased)]


def combined_estimator_demo(spec: SpinRingSpec, n_s: int, p: PauliString,
                            repetitions: int, seed: int,
                            alpha_override: float | None = None) -> CombinedReport:
    """Estimate E = tr[(H + P) rho] with and without biasing the P term.

    Per repetition the same fresh collection yields the Hamiltonian estimate
    A and the perturbation estimate R; the three estimators are A (drop the
    correction), A + R (unbiased) and A + (1-alpha*) R with alpha* from the
    shadow SNR of P (or ``alpha_override``).
    """
    if p.weight < 4:
        raise ValueError("the perturbation should have weight >= 4 to be SNR-limited")
    if abs(abs(p.coefficient) - 1.0) > 0.0:
        raise ValueError("perturbation coefficient must be +-1")
    if p.n != spec.n:
        raise ValueError(f"observable acts on {p.n} qubits, ring has {spec.n}")
    if repetitions < 2:
        raise ValueError("repetitions must be at least 2")
    ham = spin_ring_hamiltonian(spec)
    energy, state = ground_state(ham)
    a_true = ham.expectation(state)
    m_true = exact_expectation(state, p)
    exact = a_true + m_true

    term_obs = [ps for _, ps in ham.terms]
    term_coeffs = np.array([coeff for coeff, _ in ham.terms])
    observables = term_obs + [p]
    sites, letters = _observable_arrays(observables, spec.n)
    kernel_seed = np.uint64(
        _kernels.stream_state(np.uint64(seed & _MASK64),
                              np.uint64(_DOMAIN_REPETITIONS))
    )
    s_sum, _, _, _ = _kernels.experiment_stats(
        state.amplitudes, spec.n, int(n_s), int(repetitions), kernel_seed,
        sites, letters)

    weights = np.array([ps.weight for ps in term_obs])
    ps_coeffs = np.array([ps.coefficient for ps in term_obs])
    term_means = (3.0 ** weights * ps_coeffs * term_coeffs) * s_sum[:, :-1] / n_s
    a_bar = term_means.sum(axis=1)
    r_bar = p.coefficient * 3.0 ** p.weight * s_sum[:, -1] / n_s

    rep_snr = shadow_snr(p.weight, min(1.0, max(-1.0, m_true)), n_s)
    alpha_star = rep_snr.alpha_star if alpha_override is None else float(alpha_override)

    err_drop = (a_bar - exact) ** 2
    err_unb = (a_bar + r_bar - exact) ** 2
    err_bias = (a_bar + (1.0 - alpha_star) * r_bar - exact) ** 2
    mse_d, se_d = _mse_and_se(err_drop)
    mse_u, se_u = _mse_and_se(err_unb)
    mse_b, se_b = _mse_and_se(err_bias)
    d_bd = err_bias - err_drop
    d_bu = err_bias - err_unb
    reps = repetitions
    config = {
        "n": spec.n, "coupling": spec.coupling, "omega_seed": spec.omega_seed,
        "omegas": list(spec.omegas), "n_s": int(n_s), "observable": p.letters,
        "observable_coefficient": p.coefficient, "repetitions": int(repetitions),
        "seed": int(seed),
        "alpha_override": alpha_override,
    }
    return CombinedReport(
        exact_value=exact, hamiltonian_part=a_true, perturbation_part=m_true,
        beta=rep_snr.beta, alpha_star=alpha_star,
        mse_drop=mse_d, se_drop=se_d,
        mse_unbiased=mse_u, se_unbiased=se_u,
        mse_biased=mse_b, se_biased=se_b,
        diff_biased_minus_drop=float(d_bd.mean()),
        se_diff_biased_minus_drop=float(d_bd.std(ddof=1) / math.sqrt(reps)),
        diff_biased_minus_unbiased=float(d_bu.mean()),
        se_diff_biased_minus_unbiased=float(d_bu.std(ddof=1) / math.sqrt(reps)),
        config=config,
    )


@dataclass(frozen=True)
class DensitySampleTable:
    """Cloud of averaged (<X>, <Z>) estimates with hypothetical biased twins."""

    columns: tuple
    data: np.ndarray
    config: dict


def emit_density_samples(bloch, n_s: int = 100, n_points: int = 10_000,
                         epsilon: float = 0.1, seed: int = 0) -> DensitySampleTable:
    """Sample the Fig.-1 density cloud for a single-qubit Bloch state.

    Each row holds the unbiased (<X>, <Z>) mean estimate over N_s snapshots,
    the same estimate rescaled by sqrt(1-eps), and the sign of the change in
    squared (X, Z)-plane error upon biasing.  The boundary between signs is a
    circle through the origin with center r_xz/(1+sqrt(1-eps)); the true
    Bloch vector lies on its diameter through the origin.
    """
    r = np.asarray(bloch, dtype=float)
    if r.shape != (3,):
        raise ValueError("Bloch vector must have 3 components")
    if np.linalg.norm(r) > 1.0 + 1e-12:
        raise ValueError(f"unphysical Bloch vector, |r| = {np.linalg.norm(r)}")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    if n_s < 1 or n_points < 1:
        raise ValueError("n_s and n_points must be positive")
    xz = _kernels.bloch_xz_means(float(r[0]), float(r[1]), float(r[2]),
                                 int(n_s), int(n_points),
                                 np.uint64(seed & _MASK64))
    s = math.sqrt(1.0 - epsilon)
    x_u, z_u = xz[:, 0], xz[:, 1]
    x_b, z_b = s * x_u, s * z_u
    loss_u = (x_u - r[0]) ** 2 + (z_u - r[2]) ** 2
    loss_b = (x_b - r[0]) ** 2 + (z_b - r[2]) ** 2
    sign = np.sign(loss_b - loss_u)
    data = np.column_stack([x_u, z_u, x_b, z_b, sign])
    r_xz = np.array([r[0], r[2]])
    center = r_xz / (1.0 + s)
    config = {
        "r": list(map(float, r)), "n_s": int(n_s), "n_points": int(n_points),
        "epsilon": float(epsilon), "seed": int(seed),
        "circle_center": [float(center[0]), float(center[1])],
        "circle_radius": float(np.linalg.norm(r_xz) / (1.0 + s)),
    }
    return DensitySampleTable(
        columns=("x_unbiased", "z_unbiased", "x_biased", "z_biased",
                 "loss_change_sign"),
        data=data, config=config,
    )
