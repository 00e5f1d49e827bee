"""Hot numeric kernels shared by the sampling, estimation and experiment code.

Everything in this module is written against the numba nopython subset
(plain loops, NumPy scalars/arrays only) and compiled by
:func:`biased_shadows.backend.jit`.

Randomness is counter based: every snapshot / repetition / sample point gets
its own splitmix64 stream derived from ``(seed, index)``, so results are
independent of evaluation order and identical across backends.

Encodings used throughout:
  measurement bases   uint8: 0=X, 1=Y, 2=Z
  outcome bits        uint8: 0 -> +1 eigenvalue, 1 -> -1 eigenvalue
  Pauli letters       uint8: 0=I, 1=X, 2=Y, 3=Z  (letter matches basis+1)
  qubit j             bit j of the amplitude index (qubit 0 is the LSB)
"""

import numpy as np

from .backend import jit

# splitmix64 constants (Steele, Lea, Flood 2014)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TO_UNIT = 1.0 / 9007199254740992.0  # 2**-53
_INV_SQRT2 = 0.7071067811865476


@jit
def mix64(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@jit
def stream_state(seed, index):
    """Initial splitmix64 state of substream ``index`` of ``seed``."""
    return mix64(mix64(seed + _GAMMA) + index * _GAMMA)


@jit
def unit_from(state):
    """Uniform double in [0, 1) from a raw splitmix64 state."""
    return np.float64(mix64(state) >> _S11) * _TO_UNIT


@jit
def _sample_into(amps, n, state, bases_row, outcomes_row, buf):
    # Measure qubits n-1 .. 0, compacting the surviving amplitude block
    # after each projection (qubit being measured is always the MSB of the
    # active block), for O(2^n) total work per snapshot.
    dim = 1 << n
    for i in range(dim):
        buf[i] = amps[i]
    for j in range(n - 1, -1, -1):
        half = 1 << j
        state = state + _GAMMA
        b = int(unit_from(state) * 3.0)
        bases_row[j] = b
        if b == 0:  # X basis: Hadamard
            for i in range(half):
                a0 = buf[i]
                a1 = buf[i + half]
                buf[i] = (a0 + a1) * _INV_SQRT2
                buf[i + half] = (a0 - a1) * _INV_SQRT2
        elif b == 1:  # Y basis: H S^dagger
            for i in range(half):
                a0 = buf[i]
                t = buf[i + half] * 1j
                buf[i] = (a0 - t) * _INV_SQRT2
                buf[i + half] = (a0 + t) * _INV_SQRT2
        p0 = 0.0
        p1 = 0.0
        for i in range(half):
            v = buf[i]
            p0 += v.real * v.real + v.imag * v.imag
        for i in range(half, 2 * half):
            v = buf[i]
            p1 += v.real * v.real + v.imag * v.imag
        tot = p0 + p1
        if tot <= 0.0:
            raise ValueError("zero-norm intermediate state during sampling")
        state = state + _GAMMA
        if unit_from(state) * tot < p0:
            outcomes_row[j] = 0
            inv = 1.0 / np.sqrt(p0)
            for i in range(half):
                buf[i] = buf[i] * inv
        else:
            outcomes_row[j] = 1
            inv = 1.0 / np.sqrt(p1)
            for i in range(half):
                buf[i] = buf[i + half] * inv


@jit
def sample_one(amps, n, state):
    """One snapshot from an explicit stream state; uses exactly 2n draws."""
    bases = np.empty(n, np.uint8)
    outcomes = np.empty(n, np.uint8)
    buf = np.empty(1 << n, np.complex128)
    _sample_into(amps, n, state, bases, outcomes, buf)
    return bases, outcomes


@jit
def sample_collection(amps, n, n_s, seed):
    """N_s snapshots; snapshot i is drawn from substream (seed, i)."""
    bases = np.empty((n_s, n), np.uint8)
    outcomes = np.empty((n_s, n), np.uint8)
    buf = np.empty(1 << n, np.complex128)
    for i in range(n_s):
        st = stream_state(seed, np.uint64(i))
        _sample_into(amps, n, st, bases[i], outcomes[i], buf)
    return bases, outcomes


@jit
def match_stats(bases, outcomes, sites, letters):
    """Per-observable signed match counts over a snapshot batch.

    For observable ``ob`` the snapshot contributes sign
    prod_{t}(-1)^{outcome at site t} when every non-identity letter equals
    the measured basis at its site, else nothing.  Returns the integer sums
    (S, C): sum of signs over matches and number of matches.
    """
    n_s = bases.shape[0]
    m = sites.shape[0]
    wmax = sites.shape[1]
    s_sum = np.zeros(m, np.int64)
    count = np.zeros(m, np.int64)
    for i in range(n_s):
        for ob in range(m):
            sign = 1
            ok = True
            for t in range(wmax):
                let = letters[ob, t]
                if let == 0:
                    continue
                q = sites[ob, t]
                if bases[i, q] != let - 1:
                    ok = False
                    break
                if outcomes[i, q] == 1:
                    sign = -sign
            if ok:
                s_sum[ob] += sign
                count[ob] += 1
    return s_sum, count


@jit
def experiment_stats(amps, n, n_s, reps, seed, sites, letters):
    """Signed match counts for many observables over ``reps`` fresh shadows.

    Repetition r uses the collection seed stream_state(seed, r), so each
    repetition equals sample_collection(amps, n, n_s, stream_state(seed, r)).
    Also returns the same statistics restricted to the first n_s//2
    snapshots (for sample-split bias estimation).
    """
    m = sites.shape[0]
    wmax = sites.shape[1]
    half_ns = n_s // 2
    s_sum = np.zeros((reps, m), np.int64)
    count = np.zeros((reps, m), np.int64)
    s_half = np.zeros((reps, m), np.int64)
    c_half = np.zeros((reps, m), np.int64)
    bases = np.empty(n, np.uint8)
    outcomes = np.empty(n, np.uint8)
    buf = np.empty(1 << n, np.complex128)
    for r in range(reps):
        cseed = stream_state(seed, np.uint64(r))
        for i in range(n_s):
            st = stream_state(cseed, np.uint64(i))
            _sample_into(amps, n, st, bases, outcomes, buf)
            for ob in range(m):
                sign = 1
                ok = True
                for t in range(wmax):
                    let = letters[ob, t]
                    if let == 0:
                        continue
                    q = sites[ob, t]
                    if bases[q] != let - 1:
                        ok = False
                        break
                    if outcomes[q] == 1:
                        sign = -sign
                if ok:
                    s_sum[r, ob] += sign
                    count[r, ob] += 1
                    if i < half_ns:
                        s_half[r, ob] += sign
                        c_half[r, ob] += 1
    return s_sum, count, s_half, c_half


@jit
def apply_pauli_terms(coeffs, xmasks, zmasks, psi, out):
    """out = (sum_t coeffs[t] * P_t) psi for bitmask-encoded Pauli strings.

    ``coeffs`` already carry the i**(#Y) phase of each string.  xmask has
    bits where the letter is X or Y, zmask where it is Z or Y.
    """
    dim = psi.shape[0]
    for i in range(dim):
        out[i] = 0.0
    for t in range(coeffs.shape[0]):
        x = xmasks[t]
        z = zmasks[t]
        c = coeffs[t]
        for i in range(dim):
            v = i & z
            v ^= v >> 8
            v ^= v >> 4
            if (np.int64(0x6996) >> (v & 15)) & 1:
                out[i ^ x] -= c * psi[i]
            else:
                out[i ^ x] += c * psi[i]
    return out


@jit
def pauli_quadratic_form(xmask, zmask, phase, psi):
    """<psi| P |psi> for one bitmask-encoded Pauli string (phase = i**#Y)."""
    dim = psi.shape[0]
    acc = 0.0 + 0.0j
    for i in range(dim):
        v = i & zmask
        v ^= v >> 8
        v ^= v >> 4
        amp = psi[i]
        if (np.int64(0x6996) >> (v & 15)) & 1:
            amp = -amp
        acc += np.conj(psi[i ^ xmask]) * amp
    return acc * phase


@jit
def best_case_counts(w, n_s, reps, seed):
    """Sums of N_s draws from the three-point law P(+-1)=3^-w/2, P(0)=rest.

    Repetition r is drawn from substream (seed, r).
    """
    p = 1.0 / 3.0 ** w
    half = 0.5 * p
    out = np.empty(reps, np.int64)
    for r in range(reps):
        st = stream_state(seed, np.uint64(r))
        k = 0
        for _ in range(n_s):
            st = st + _GAMMA
            u = unit_from(st)
            if u < half:
                k += 1
            elif u < p:
                k -= 1
        out[r] = k
    return out


@jit
def bloch_xz_means(rx, ry, rz, n_s, n_points, seed):
    """Unbiased (<X>, <Z>) mean estimates of a single-qubit Bloch state.

    Each of the n_points rows averages N_s single-qubit snapshots sampled
    from the exact 6-point (basis, outcome) law of the state
    (1/2)(I + r.sigma); point i uses substream (seed, i).
    """
    out = np.empty((n_points, 2), np.float64)
    for pt in range(n_points):
        st = stream_state(seed, np.uint64(pt))
        sx = 0
        sz = 0
        for _ in range(n_s):
            st = st + _GAMMA
            b = int(unit_from(st) * 3.0)
            if b == 0:
                rb = rx
            elif b == 1:
                rb = ry
            else:
                rb = rz
            st = st + _GAMMA
            o = 0 if unit_from(st) < 0.5 * (1.0 + rb) else 1
            if b == 0:
                sx += 1 - 2 * o
            elif b == 2:
                sz += 1 - 2 * o
        out[pt, 0] = 3.0 * sx / n_s
        out[pt, 1] = 3.0 * sz / n_s
    return out
