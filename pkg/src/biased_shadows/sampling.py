"""Randomized local-Pauli measurement protocol: snapshots and shadow collections.

Each snapshot measures every qubit in a basis drawn uniformly from {X, Y, Z},
with outcomes drawn from the Born distribution by measuring the qubits
sequentially (rotate into the basis, sample the marginal bit, project,
renormalize).  Collections are reproducible: snapshot i of seed s is drawn
from the splitmix64 substream (s, i), so the result does not depend on
evaluation order.
"""

import json
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _kernels
from .pauli import Statevector

PROTOCOL_TAG = "local-pauli-uniform"

BASIS_CHARS = "XYZ"

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Small counter-based random stream with cheap substream derivation."""

    __slots__ = ("state",)

    def __init__(self, seed: int, stream: int = 0):
        self.state = int(_kernels.stream_state(np.uint64(seed & _MASK64),
                                               np.uint64(stream & _MASK64)))

    def uniform(self) -> float:
        """Next double in [0, 1)."""
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        return float(_kernels.unit_from(np.uint64(self.state)))

    def skip(self, k: int) -> None:
        """Advance by k draws without generating them."""
        self.state = (self.state + k * 0x9E3779B97F4A7C15) & _MASK64


def _as_basis_codes(bases) -> np.ndarray:
    if isinstance(bases, str):
        try:
            codes = np.array([BASIS_CHARS.index(c) for c in bases], dtype=np.uint8)
        except ValueError:
            raise ValueError(f"bases must use letters XYZ, got {bases!r}") from None
        return codes
    codes = np.asarray(bases, dtype=np.uint8)
    if codes.ndim != 1 or np.any(codes > 2):
        raise ValueError("basis codes must be a 1-d sequence over {0, 1, 2}")
    return codes


@dataclass(frozen=True)
class Snapshot:
    """One shadow sample: measurement basis and outcome bit per qubit."""

    bases: np.ndarray    # uint8 codes, 0=X 1=Y 2=Z
    outcomes: np.ndarray  # uint8 bits, 0 -> +1 eigenvalue, 1 -> -1

    def __post_init__(self):
        bases = np.ascontiguousarray(self.bases, dtype=np.uint8)
        outcomes = np.ascontiguousarray(self.outcomes, dtype=np.uint8)
        if bases.shape != outcomes.shape or bases.ndim != 1 or bases.shape[0] == 0:
            raise ValueError("bases and outcomes must be equal-length 1-d arrays")
        if np.any(bases > 2) or np.any(outcomes > 1):
            raise ValueError("invalid basis or outcome codes")
        bases.flags.writeable = False
        outcomes.flags.writeable = False
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "outcomes", outcomes)

    @property
    def n(self) -> int:
        return int(self.bases.shape[0])

    def basis_string(self) -> str:
        return "".join(BASIS_CHARS[b] for b in self.bases)

    def outcome_string(self) -> str:
        return "".join(str(int(o)) for o in self.outcomes)


@dataclass(frozen=True)
class ShadowCollection:
    """N_s snapshots plus the seed and protocol that produced them."""

    bases: np.ndarray     # (N_s, n) uint8
    outcomes: np.ndarray  # (N_s, n) uint8
    seed: int
    protocol_tag: str = PROTOCOL_TAG

    def __post_init__(self):
        bases = np.ascontiguousarray(self.bases, dtype=np.uint8)
        outcomes = np.ascontiguousarray(self.outcomes, dtype=np.uint8)
        if bases.ndim != 2 or bases.shape != outcomes.shape:
            raise ValueError("bases and outcomes must be equal-shape (N_s, n) arrays")
        if bases.shape[0] < 1 or bases.shape[1] < 1:
            raise ValueError("collection must contain at least one snapshot of one qubit")
        bases.flags.writeable = False
        outcomes.flags.writeable = False
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "outcomes", outcomes)

    @property
    def n(self) -> int:
        return int(self.bases.shape[1])

    @property
    def n_snapshots(self) -> int:
        return int(self.bases.shape[0])

    def __len__(self) -> int:
        return self.n_snapshots

    def __getitem__(self, i: int) -> Snapshot:
        return Snapshot(self.bases[i].copy(), self.outcomes[i].copy())

    def __iter__(self) -> Iterator[Snapshot]:
        return (self[i] for i in range(self.n_snapshots))

    def to_json(self) -> str:
        """Interchange form: one JSON object with per-snapshot strings."""
        snaps = [
            {"bases": "".join(BASIS_CHARS[b] for b in row_b),
             "outcomes": "".join(str(int(o)) for o in row_o)}
            for row_b, row_o in zip(self.bases, self.outcomes)
        ]
        return json.dumps(
            {"n": self.n, "seed": self.seed, "protocol_tag": self.protocol_tag,
             "snapshots": snaps},
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "ShadowCollection":
        obj = json.loads(text)
        n = int(obj["n"])
        snaps = obj["snapshots"]
        bases = np.empty((len(snaps), n), dtype=np.uint8)
        outcomes = np.empty((len(snaps), n), dtype=np.uint8)
        for i, snap in enumerate(snaps):
            bases[i] = _as_basis_codes(snap["bases"])
            outcomes[i] = np.frombuffer(snap["outcomes"].encode(), dtype=np.uint8) - ord("0")
        return cls(bases, outcomes, int(obj["seed"]), str(obj["protocol_tag"]))


def sample_snapshot(state: Statevector, rng: SplitMix64) -> Snapshot:
    """Draw one snapshot from ``rng``, consuming exactly 2n uniform draws."""
    bases, outcomes = _kernels.sample_one(
        state.amplitudes, state.n, np.uint64(rng.state)
    )
    rng.skip(2 * state.n)
    return Snapshot(bases, outcomes)


def collect_shadow(state: Statevector, n_s: int, seed: int) -> ShadowCollection:
    """N_s snapshots of ``state``; a pure function of (state, N_s, seed).

    Equivalent to ``[sample_snapshot(state, SplitMix64(seed, i)) for i in
    range(n_s)]`` but runs in the compiled kernel.
    """
    if n_s < 1:
        raise ValueError("n_s must be at least 1")
    bases, outcomes = _kernels.sample_collection(
        state.amplitudes, state.n, n_s, np.uint64(seed & _MASK64)
    )
    return ShadowCollection(bases, outcomes, seed)


_ROTATIONS = {
    0: np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),          # X: H
    1: np.array([[1, -1j], [1, 1j]], dtype=complex) / np.sqrt(2),        # Y: H S^dag
    2: np.eye(2, dtype=complex),                                         # Z
}


def outcome_distribution(state: Statevector, bases) -> np.ndarray:
    """Exact Born probabilities of all 2^n outcome bitstrings.

    Entry i is the probability that measuring qubit j in basis ``bases[j]``
    yields bit j of i, jointly for all qubits.  This is the dense oracle the
    sampler is tested against; n is capped at 12.
    """
    codes = _as_basis_codes(bases)
    n = state.n
    if codes.shape[0] != n:
        raise ValueError(f"expected {n} bases, got {codes.shape[0]}")
    if n > 12:
        raise ValueError("outcome_distribution supports at most 12 qubits")
    psi = state.amplitudes.reshape([2] * n)
    for q, b in enumerate(codes):
        if b == 2:
            continue
        axis = n - 1 - q
        psi = np.moveaxis(np.tensordot(_ROTATIONS[int(b)], psi, axes=([1], [axis])),
                          0, axis)
    return np.abs(psi.reshape(-1)) ** 2
