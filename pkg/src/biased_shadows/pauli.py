"""Pauli-string algebra and dense linear algebra over small qubit registers.

Conventions (used by every module in the package):

* qubit ``j`` is the j-th least-significant bit of the computational-basis
  amplitude index, so ``|b_{n-1} ... b_1 b_0>`` has index ``sum b_j 2^j``;
* a :class:`PauliString` stores one letter per qubit, ``letters[j]`` acting
  on qubit ``j``;
* Pauli strings are applied through bit manipulation of amplitude indices,
  never by materializing 2^n x 2^n matrices.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import _kernels

_LETTERS = "IXYZ"

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli observable ``coefficient * L_{n-1} x ... x L_0``."""

    letters: str
    coefficient: float = 1.0

    def __post_init__(self):
        if not self.letters or any(c not in _LETTERS for c in self.letters):
            raise ValueError(f"letters must be a nonempty string over IXYZ, got {self.letters!r}")
        if not np.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")

    @classmethod
    def from_sites(cls, n: int, sites: Sequence[int], letters: Sequence[str],
                   coefficient: float = 1.0) -> "PauliString":
        """Build an n-qubit string with the given letters at ``sites``, I elsewhere."""
        if len(sites) != len(letters):
            raise ValueError("sites and letters must have equal length")
        chars = ["I"] * n
        for q, c in zip(sites, letters):
            if not 0 <= q < n:
                raise ValueError(f"site {q} out of range for n={n}")
            if chars[q] != "I":
                raise ValueError(f"duplicate site {q}")
            chars[q] = c
        return cls("".join(chars), coefficient)

    @property
    def n(self) -> int:
        return len(self.letters)

    @cached_property
    def weight(self) -> int:
        return sum(1 for c in self.letters if c != "I")

    @cached_property
    def support(self) -> tuple:
        return tuple(j for j, c in enumerate(self.letters) if c != "I")

    @cached_property
    def x_mask(self) -> int:
        return sum(1 << j for j, c in enumerate(self.letters) if c in "XY")

    @cached_property
    def z_mask(self) -> int:
        return sum(1 << j for j, c in enumerate(self.letters) if c in "ZY")

    @cached_property
    def phase(self) -> complex:
        """i**(#Y): the phase relating the bitmask action to the matrix."""
        return 1j ** sum(1 for c in self.letters if c == "Y")

    def letter_codes(self) -> np.ndarray:
        """uint8 codes (0=I, 1=X, 2=Y, 3=Z) on the support, support order."""
        return np.array([_LETTERS.index(self.letters[q]) for q in self.support],
                        dtype=np.uint8)

    def __str__(self):
        return f"{self.coefficient:+g}*{self.letters}"


@dataclass(frozen=True)
class Statevector:
    """Pure state of n qubits as a normalized complex amplitude array."""

    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        dim = amps.shape[0]
        if amps.ndim != 1 or dim < 2 or dim & (dim - 1):
            raise ValueError("amplitudes must be a length-2^n vector with n >= 1")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, amps) -> "Statevector":
        amps = np.asarray(amps, dtype=np.complex128)
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(amps / norm)

    @classmethod
    def computational_basis(cls, n: int, index: int) -> "Statevector":
        amps = np.zeros(1 << n, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @property
    def n(self) -> int:
        return int(self.amplitudes.shape[0]).bit_length() - 1


def pauli_weight(p: PauliString) -> int:
    """Number of non-identity letters of ``p``."""
    return p.weight


def exact_expectation(state: Statevector, p: PauliString) -> float:
    """<psi| P |psi>, evaluated matrix-free in O(2^n)."""
    if p.n != state.n:
        raise ValueError(f"qubit count mismatch: state has {state.n}, observable has {p.n}")
    val = _kernels.pauli_quadratic_form(
        np.int64(p.x_mask), np.int64(p.z_mask), complex(p.phase), state.amplitudes
    )
    val = complex(val) * p.coefficient
    if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
        raise ValueError(f"expectation has non-negligible imaginary part {val.imag:.3e}")
    return float(val.real)


def reduced_density(state: Statevector, qubits: Sequence[int]) -> np.ndarray:
    """Partial trace of |psi><psi| onto ``qubits`` (at most 3 of them).

    Qubit ``qubits[t]`` becomes qubit t (bit t) of the reduced system.
    """
    qubits = list(qubits)
    n = state.n
    if not qubits or len(qubits) > 3:
        raise ValueError("qubits must contain between 1 and 3 indices")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate qubit indices in {qubits}")
    if any(not 0 <= q < n for q in qubits):
        raise ValueError(f"qubit index out of range for n={n}: {qubits}")
    k = len(qubits)
    # axis of qubit q in the [2]*n reshape is n-1-q (row-major, MSB first)
    kept = [n - 1 - q for q in reversed(qubits)]
    rest = [ax for ax in range(n) if ax not in kept]
    psi = state.amplitudes.reshape([2] * n).transpose(kept + rest).reshape(1 << k, -1)
    rho = psi @ psi.conj().T
    return rho


def bloch_of(rho: np.ndarray) -> np.ndarray:
    """Bloch vector r_i = tr(sigma_i rho) of a 2x2 Hermitian unit-trace matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ValueError("input is not Hermitian")
    tr = rho[0, 0] + rho[1, 1]
    if abs(tr - 1.0) > 1e-10:
        raise ValueError(f"input trace {tr} != 1")
    return np.array([
        2.0 * rho[1, 0].real,
        2.0 * rho[1, 0].imag,
        (rho[0, 0] - rho[1, 1]).real,
    ])


def density_from_bloch(r: Sequence[float]) -> np.ndarray:
    """(1/2)(I + r . sigma); inverse of :func:`bloch_of` on the unit ball."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError("Bloch vector must have 3 components")
    if np.linalg.norm(r) > 1.0 + 1e-12:
        raise ValueError(f"unphysical Bloch vector, |r| = {np.linalg.norm(r)}")
    rho = 0.5 * (PAULI_1Q["I"] + r[0] * PAULI_1Q["X"] + r[1] * PAULI_1Q["Y"]
                 + r[2] * PAULI_1Q["Z"])
    return rho
