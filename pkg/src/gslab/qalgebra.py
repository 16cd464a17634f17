"""Dense linear algebra over polarization qubits.

Conventions used everywhere in the package:

* qubits are labelled 1..n, qubit 1 is the most significant bit of a basis index;
* ``|H>`` is bit 0 and ``|V>`` is bit 1.

All value types are frozen and hold read-only arrays, so they can be shared
between threads freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 12
ATOL_EXACT = 1e-12
ATOL_EIG = 1e-10

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CZ = np.diag([1, 1, 1, -1]).astype(complex)

PAULI_MATRICES = {"I": I2, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


class HermiticityError(ValueError):
    """An operator expected to be Hermitian is not."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


def _n_qubits_for(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if n < 1 or 1 << n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two >= 2")
    if n > MAX_QUBITS:
        raise DimensionError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit limit")
    return n


def is_hermitian(matrix: np.ndarray, atol: float = ATOL_EXACT) -> bool:
    return bool(np.all(np.abs(matrix - matrix.conj().T) <= atol))


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    normalized: bool = True
    n_qubits: int = field(init=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        object.__setattr__(self, "n_qubits", _n_qubits_for(amps.size))
        object.__setattr__(self, "amplitudes", _frozen(amps))
        if self.normalized:
            norm2 = float(np.vdot(amps, amps).real)
            if abs(norm2 - 1) > ATOL_EXACT:
                raise ValueError(f"state declared normalized but |psi|^2 = {norm2!r}")

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def normalize(self) -> PureState:
        norm = np.linalg.norm(self.amplitudes)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return PureState(self.amplitudes / norm)

    def density_matrix(self) -> MixedState:
        return MixedState(np.outer(self.amplitudes, self.amplitudes.conj()))

    def projector(self, label: str = "") -> Observable:
        return Observable(np.outer(self.amplitudes, self.amplitudes.conj()), label=label)

    def __repr__(self):
        return f"PureState(n_qubits={self.n_qubits})"


@dataclass(frozen=True, eq=False)
class MixedState:
    matrix: np.ndarray
    normalized: bool = True
    check_psd: bool = True
    n_qubits: int = field(init=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"density matrix must be square, got {mat.shape}")
        object.__setattr__(self, "n_qubits", _n_qubits_for(mat.shape[0]))
        if not is_hermitian(mat):
            raise HermiticityError("density matrix is not Hermitian within 1e-12")
        if self.normalized and abs(np.trace(mat).real - 1) > ATOL_EXACT:
            raise ValueError(f"trace is {np.trace(mat).real!r}, expected 1")
        if self.check_psd:
            lowest = np.linalg.eigvalsh(mat)[0]
            if lowest < -ATOL_EIG:
                raise ValueError(f"density matrix has eigenvalue {lowest!r} < -1e-10")
        object.__setattr__(self, "matrix", _frozen(mat))

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> MixedState:
        dim = 1 << n_qubits
        return cls(np.eye(dim) / dim)

    def mix(self, other: MixedState, weight: float) -> MixedState:
        """Return ``weight * self + (1 - weight) * other``."""
        if other.n_qubits != self.n_qubits:
            raise DimensionError("cannot mix states of different sizes")
        return MixedState(weight * self.matrix + (1 - weight) * other.matrix)

    def __repr__(self):
        return f"MixedState(n_qubits={self.n_qubits})"


@dataclass(frozen=True, eq=False)
class Observable:
    matrix: np.ndarray
    label: str = ""
    n_qubits: int = field(init=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"observable must be square, got {mat.shape}")
        object.__setattr__(self, "n_qubits", _n_qubits_for(mat.shape[0]))
        if not is_hermitian(mat):
            raise HermiticityError(f"observable {self.label!r} is not Hermitian within 1e-12")
        object.__setattr__(self, "matrix", _frozen(mat))

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def __add__(self, other: Observable) -> Observable:
        return Observable(self.matrix + other.matrix, label=f"({self.label} + {other.label})")

    def __sub__(self, other: Observable) -> Observable:
        return Observable(self.matrix - other.matrix, label=f"({self.label} - {other.label})")

    def __repr__(self):
        return f"Observable({self.label!r}, n_qubits={self.n_qubits})"


@dataclass(frozen=True)
class PauliString:
    """A signed tensor product of Pauli letters, e.g. ``PauliString("ZZIIII")``."""

    letters: str
    phase: int = 1

    def __post_init__(self):
        letters = self.letters.upper()
        if not letters or set(letters) - set("IXYZ"):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")
        if self.phase not in (1, -1):
            raise ValueError("phase must be +1 or -1")
        object.__setattr__(self, "letters", letters)

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    def matrix(self) -> np.ndarray:
        return self.phase * reduce(np.kron, [PAULI_MATRICES[c] for c in self.letters])

    def to_observable(self) -> Observable:
        return Observable(self.matrix(), label=str(self))

    def support(self) -> tuple[int, ...]:
        """1-based qubits where the string acts non-trivially."""
        return tuple(i + 1 for i, c in enumerate(self.letters) if c != "I")

    def commutes_with(self, other: PauliString) -> bool:
        clashes = sum(
            1 for a, b in zip(self.letters, other.letters) if a != "I" and b != "I" and a != b
        )
        return clashes % 2 == 0

    def __str__(self):
        return ("-" if self.phase < 0 else "+") + self.letters


def basis_state(bits: str) -> PureState:
    """Computational basis ket from a bit string, or from letters ``H``/``V``."""
    bits = bits.upper().replace("H", "0").replace("V", "1")
    amps = np.zeros(1 << len(bits), dtype=complex)
    amps[int(bits, 2)] = 1
    return PureState(amps)


def tensor(parts: Sequence[PureState] | Sequence[Observable]):
    """Kronecker product with qubit order following the order of ``parts``."""
    parts = list(parts)
    if not parts:
        raise ValueError("tensor of an empty list")
    kinds = {type(p) for p in parts}
    if len(kinds) != 1 or kinds.pop() not in (PureState, Observable, MixedState):
        raise TypeError("tensor requires parts of a single kind")
    total = sum(p.n_qubits for p in parts)
    if total > MAX_QUBITS:
        raise DimensionError(f"tensor would have {total} qubits (> {MAX_QUBITS})")
    first = parts[0]
    if isinstance(first, PureState):
        return PureState(
            reduce(np.kron, [p.amplitudes for p in parts]),
            normalized=all(p.normalized for p in parts),
        )
    if isinstance(first, MixedState):
        return MixedState(reduce(np.kron, [p.matrix for p in parts]))
    return Observable(reduce(np.kron, [p.matrix for p in parts]),
                      label=" ⊗ ".join(p.label for p in parts))


def expectation(state: PureState | MixedState, obs: Observable | PauliString) -> float:
    if isinstance(obs, PauliString):
        obs = obs.to_observable()
    if state.n_qubits != obs.n_qubits:
        raise DimensionError(f"state has {state.n_qubits} qubits, observable {obs.n_qubits}")
    if isinstance(state, PureState):
        value = np.vdot(state.amplitudes, obs.matrix @ state.amplitudes)
    else:
        value = np.einsum("ij,ji->", obs.matrix, state.matrix)
    if abs(value.imag) > ATOL_EIG:
        raise ArithmeticError(f"expectation has imaginary part {value.imag!r}")
    return float(value.real)


def _check_qubits(indices: Iterable[int], n_qubits: int) -> list[int]:
    indices = sorted(set(indices))
    for q in indices:
        if not 1 <= q <= n_qubits:
            raise IndexError(f"qubit {q} outside 1..{n_qubits}")
    return indices


def partial_trace(rho: MixedState | PureState, keep: Iterable[int]) -> MixedState:
    """Reduce onto the 1-based qubits in ``keep`` (kept qubits stay in ascending order)."""
    if isinstance(rho, PureState):
        rho = rho.density_matrix()
    n = rho.n_qubits
    keep = _check_qubits(keep, n)
    if not keep:
        raise ValueError("keep set must be nonempty")
    drop = [q for q in range(1, n + 1) if q not in keep]
    if not drop:
        return rho
    tensor_ = rho.matrix.reshape((2,) * (2 * n))
    k = len(keep)
    kept_axes = [q - 1 for q in keep]
    dropped_axes = [q - 1 for q in drop]
    order = kept_axes + dropped_axes + [n + a for a in kept_axes] + [n + a for a in dropped_axes]
    t = tensor_.transpose(order).reshape(1 << k, 1 << (n - k), 1 << k, 1 << (n - k))
    reduced = np.einsum("ajbj->ab", t)
    return MixedState(reduced, normalized=rho.normalized)


def permute_qubits(state: PureState | MixedState, order: Sequence[int]):
    """Reorder qubits so that new qubit ``i`` is old qubit ``order[i-1]`` (1-based)."""
    n = state.n_qubits
    if sorted(order) != list(range(1, n + 1)):
        raise ValueError(f"{order!r} is not a permutation of 1..{n}")
    axes = [q - 1 for q in order]
    if isinstance(state, PureState):
        amps = state.amplitudes.reshape((2,) * n).transpose(axes).reshape(-1)
        return PureState(amps, normalized=state.normalized)
    mat = state.matrix.reshape((2,) * (2 * n)).transpose(axes + [n + a for a in axes])
    return MixedState(mat.reshape(1 << n, 1 << n), normalized=state.normalized)


def embed(op: np.ndarray, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """Dense matrix of ``op`` acting on the listed 1-based qubits of an n-qubit register."""
    k = len(qubits)
    if op.shape != (1 << k, 1 << k):
        raise DimensionError(f"operator of shape {op.shape} does not act on {k} qubits")
    qubits = list(qubits)
    _check_qubits(qubits, n_qubits)
    if len(set(qubits)) != k:
        raise ValueError("repeated qubit in embed")
    rest = [q for q in range(1, n_qubits + 1) if q not in qubits]
    full = np.kron(op, np.eye(1 << len(rest)))
    # full acts on the ordering qubits + rest; move back to 1..n
    order = qubits + rest
    inverse = [order.index(q) for q in range(1, n_qubits + 1)]
    n = n_qubits
    full = full.reshape((2,) * (2 * n)).transpose(inverse + [n + a for a in inverse])
    return full.reshape(1 << n, 1 << n)


def apply_unitary(state, unitary: np.ndarray, qubits: Sequence[int]):
    u = embed(np.asarray(unitary, dtype=complex), qubits, state.n_qubits)
    if isinstance(state, PureState):
        return PureState(u @ state.amplitudes, normalized=state.normalized)
    return MixedState(u @ state.matrix @ u.conj().T, normalized=state.normalized)


def min_eigenvalue(obs: Observable | np.ndarray) -> float:
    matrix = obs.matrix if isinstance(obs, Observable) else np.asarray(obs, dtype=complex)
    if not is_hermitian(matrix):
        raise HermiticityError("min_eigenvalue requires a Hermitian matrix")
    if matrix.shape[0] > 4096:
        raise DimensionError("min_eigenvalue supports dimension <= 4096")
    return float(np.linalg.eigvalsh(matrix)[0])


def fidelity(state: PureState | MixedState, target: PureState) -> float:
    """Overlap ``<target|rho|target>``."""
    return expectation(state, target.projector())


def overlap_up_to_phase(a: PureState, b: PureState) -> float:
    """``|<a|b>|`` for normalized states; equals 1 iff they agree up to a global phase."""
    if a.n_qubits != b.n_qubits:
        raise DimensionError("states act on different numbers of qubits")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))


def equal_up_to_phase(a: PureState, b: PureState, atol: float = ATOL_EIG) -> bool:
    return overlap_up_to_phase(a, b) >= 1 - atol


def schmidt_max_weight(psi: PureState, part: Iterable[int]) -> float:
    """Largest squared Schmidt coefficient of ``psi`` across ``part`` | rest."""
    n = psi.n_qubits
    part = _check_qubits(part, n)
    rest = [q for q in range(1, n + 1) if q not in part]
    if not part or not rest:
        raise ValueError("bipartition needs two nonempty groups")
    t = psi.amplitudes.reshape((2,) * n).transpose([q - 1 for q in part + rest])
    s = np.linalg.svd(t.reshape(1 << len(part), -1), compute_uv=False)
    return float(s[0] ** 2)


def m_operator(n: int) -> np.ndarray:
    """Equatorial observable ``cos(n pi/6) X + sin(n pi/6) Y``."""
    phi = n * np.pi / 6
    return np.cos(phi) * SIGMA_X + np.sin(phi) * SIGMA_Y


# Named states

def plus_state() -> PureState:
    return PureState(np.array([1, 1]) / np.sqrt(2))


def minus_state() -> PureState:
    return PureState(np.array([1, -1]) / np.sqrt(2))


def phi_plus() -> PureState:
    """EPR pair (|HH> + |VV>)/sqrt 2."""
    return PureState(np.array([1, 0, 0, 1]) / np.sqrt(2))


def ghz_state(n: int = 6) -> PureState:
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return PureState(amps)


def _four_term(signs: Sequence[int]) -> PureState:
    amps = np.zeros(64, dtype=complex)
    for bits, s in zip(("000000", "000111", "111000", "111111"), signs):
        amps[int(bits, 2)] = s / 2
    return PureState(amps)


def cluster6() -> PureState:
    """(|HHHHHH> + |HHHVVV> + |VVVHHH> - |VVVVVV>)/2."""
    return _four_term((1, 1, 1, -1))


def cluster6_tilde() -> PureState:
    """Sign-flipped partner of :func:`cluster6`, orthogonal to it."""
    return _four_term((-1, 1, 1, 1))
