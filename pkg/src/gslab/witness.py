"""Genuine-multipartite-entanglement witnesses for the GHZ and cluster states.

A :class:`WitnessPlan` carries the full witness matrix together with a
decomposition into local measurement settings.  Each setting contributes a
weight vector over its 64 outcomes, so evaluating the witness from data is a
dot product per setting plus a constant.  The weights are derived from dense
operators and checked to be diagonal in the setting's eigenbasis, which is
what makes a term measurable with that setting.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from .graphs import StabilizerSet, stabilizers_of_c6
from .qalgebra import (
    ATOL_EIG,
    SIGMA_X,
    SIGMA_Z,
    MixedState,
    Observable,
    PureState,
    cluster6,
    cluster6_tilde,
    expectation,
    ghz_state,
    m_operator,
    min_eigenvalue,
    schmidt_max_weight,
)

N_QUBITS = 6
DIM = 1 << N_QUBITS
M_INDICES = (-2, -1, 0, 1, 2, 3)


class NotMeasurableError(ValueError):
    """A decomposition term is not diagonal in the setting assigned to it."""


class NoSignChangeError(ValueError):
    """The witness does not change sign along the white-noise family."""


class WitnessValidationError(AssertionError):
    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("witness validation failed: " + ", ".join(self.failures))


def _single_basis(choice: str) -> np.ndarray:
    """Rows are the bras of the +1 (row 0) and -1 (row 1) eigenvectors."""
    if choice == "Z":
        return np.eye(2, dtype=complex)
    if choice == "X":
        phi = 0.0
    elif choice.startswith("M"):
        phi = int(choice[1:]) * math.pi / 6
    else:
        raise ValueError(f"unknown local observable {choice!r}")
    phase = np.exp(-1j * phi)
    return np.array([[1, phase], [1, -phase]], dtype=complex) / math.sqrt(2)


def _single_matrix(choice: str) -> np.ndarray:
    if choice == "Z":
        return SIGMA_Z
    if choice == "X":
        return SIGMA_X
    return m_operator(int(choice[1:]))


@dataclass(frozen=True)
class MeasurementSetting:
    """One local observable per qubit: ``Z``, ``X`` or ``M<n>`` with n in -2..3."""

    choices: tuple[str, ...]
    label: str = ""

    def __post_init__(self):
        choices = tuple(self.choices)
        if len(choices) != N_QUBITS:
            raise ValueError(f"setting needs {N_QUBITS} local choices, got {len(choices)}")
        for c in choices:
            if c not in ("Z", "X") and not (c.startswith("M") and c[1:].lstrip("-").isdigit()
                                            and int(c[1:]) in M_INDICES):
                raise ValueError(f"unknown local observable {c!r}")
        object.__setattr__(self, "choices", choices)
        if not self.label:
            object.__setattr__(self, "label", "".join(
                c if len(c) == 1 else f"[{c}]" for c in choices))

    @classmethod
    def uniform(cls, choice: str, label: str = "") -> MeasurementSetting:
        return cls((choice,) * N_QUBITS, label)

    @classmethod
    def split(cls, first: str, second: str, label: str = "") -> MeasurementSetting:
        return cls((first,) * 3 + (second,) * 3, label)

    def basis_matrix(self) -> np.ndarray:
        """64x64 unitary whose row k is the bra of joint outcome k."""
        return reduce(np.kron, [_single_basis(c) for c in self.choices])

    def observable_matrix(self) -> np.ndarray:
        return reduce(np.kron, [_single_matrix(c) for c in self.choices])

    def probabilities(self, state: PureState | MixedState) -> np.ndarray:
        b = self.basis_matrix()
        if state.n_qubits != N_QUBITS:
            raise ValueError(f"expected a {N_QUBITS}-qubit state")
        if isinstance(state, PureState):
            p = np.abs(b @ state.amplitudes) ** 2
        else:
            p = np.einsum("ij,jk,ik->i", b, state.matrix, b.conj()).real
        return np.clip(p, 0.0, None)

    def outcome_weights(self, term: np.ndarray, atol: float = 1e-12) -> np.ndarray:
        """Eigenvalues of ``term`` per outcome; raises if it is not diagonal here."""
        b = self.basis_matrix()
        rotated = b @ term @ b.conj().T
        off = rotated - np.diag(np.diag(rotated))
        if np.abs(off).max() > atol:
            raise NotMeasurableError(f"term is not diagonal in setting {self.label}")
        diag = np.diag(rotated)
        if np.abs(diag.imag).max() > atol:
            raise NotMeasurableError("term has complex eigenvalues")
        return diag.real.copy()


def parity_signs(n_qubits: int = N_QUBITS, qubits: Sequence[int] | None = None) -> np.ndarray:
    """Product of +-1 eigenvalues over ``qubits`` (1-based; default all) per outcome."""
    qubits = range(1, n_qubits + 1) if qubits is None else qubits
    idx = np.arange(1 << n_qubits)
    ones = np.zeros_like(idx)
    for q in qubits:
        ones += (idx >> (n_qubits - q)) & 1
    return np.where(ones % 2, -1.0, 1.0)


@dataclass(frozen=True, eq=False)
class WitnessPlan:
    name: str
    observable: Observable
    target: PureState
    settings: tuple[MeasurementSetting, ...]
    weights: tuple[np.ndarray, ...]
    constant: float
    fidelity_is_bound: bool

    def combine(self, probabilities: Sequence[np.ndarray]) -> float:
        if len(probabilities) != len(self.settings):
            raise ValueError(f"{len(probabilities)} distributions for {len(self.settings)} settings")
        return float(self.constant + sum(w @ p for w, p in zip(self.weights, probabilities)))

    def evaluate(self, state: PureState | MixedState) -> float:
        """Witness value from exact outcome distributions of every setting."""
        return self.combine([s.probabilities(state) for s in self.settings])

    def reference(self) -> Observable:
        """I/2 - |target><target|."""
        return Observable(np.eye(DIM) / 2 - self.target.projector().matrix, label="W_ref")


def _plan_from_terms(name, observable, target, terms, constant, bound) -> WitnessPlan:
    settings = tuple(s for s, _ in terms)
    weights = tuple(s.outcome_weights(op) for s, op in terms)
    for w in weights:
        w.setflags(write=False)
    return WitnessPlan(name, observable, target, settings, weights, constant, bound)


def ghz_decomposition() -> list[tuple[MeasurementSetting, np.ndarray]]:
    """|G6><G6| as a sum of seven locally measurable terms."""
    p_h = np.diag([1, 0]).astype(complex)
    p_v = np.diag([0, 1]).astype(complex)
    diag_term = (reduce(np.kron, [p_h] * 6) + reduce(np.kron, [p_v] * 6)) / 2
    terms = [(MeasurementSetting.uniform("Z", "Z^6"), diag_term)]
    for n in M_INDICES:
        setting = MeasurementSetting.uniform(f"M{n}", f"M({n})^6")
        terms.append((setting, (-1) ** n * setting.observable_matrix() / 12))
    return terms


def ghz_witness_plan() -> WitnessPlan:
    target = ghz_state(6)
    observable = Observable(np.eye(DIM) / 2 - target.projector().matrix, label="W_G")
    terms = [(s, -op) for s, op in ghz_decomposition()]
    return _plan_from_terms("W_G", observable, target, terms, 0.5, bound=False)


def _triple_projector(generators: Sequence) -> np.ndarray:
    eye = np.eye(DIM)
    return reduce(np.matmul, [(g.matrix() + eye) / 2 for g in generators])


def _measured_by(generator, setting: MeasurementSetting) -> bool:
    return all(c == "I" or c == s for c, s in zip(generator.letters, setting.choices))


def partition_stabilizers(stabilizers: StabilizerSet, settings: Sequence[MeasurementSetting]):
    groups = [[] for _ in settings]
    for g in stabilizers:
        for i, s in enumerate(settings):
            if _measured_by(g, s):
                groups[i].append(g)
                break
        else:
            raise NotMeasurableError(f"stabilizer {g} fits none of the settings")
    return groups


def cluster_blocks(stabilizers: StabilizerSet | None = None) -> dict[str, np.ndarray]:
    """Building blocks of the six-setting cluster witness as dense matrices."""
    stabilizers = stabilizers or stabilizers_of_c6()
    zx = MeasurementSetting.split("Z", "X", "Z^3 X^3")
    xz = MeasurementSetting.split("X", "Z", "X^3 Z^3")
    odd, even = partition_stabilizers(stabilizers, [zx, xz])
    hhh = np.zeros((8, 8), dtype=complex)
    hhh[0, 0] = 1
    vvv = np.zeros((8, 8), dtype=complex)
    vvv[7, 7] = 1
    a0 = np.eye(8) - hhh - vvv
    a1 = vvv - hhh
    m_plus = reduce(np.kron, [m_operator(1)] * 3)
    m_minus = reduce(np.kron, [m_operator(-1)] * 3)
    return {
        "P_odd": _triple_projector(odd),
        "P_even": _triple_projector(even),
        "A0": a0,
        "A1": a1,
        "M+": m_plus,
        "M-": m_minus,
        "B1": (m_plus + m_minus) / (2 * math.sqrt(3)),
    }


def cluster_witness_matrix() -> np.ndarray:
    """I/2 - |C6><C6| + |C6~><C6~|."""
    return (np.eye(DIM) / 2 - cluster6().projector().matrix
            + cluster6_tilde().projector().matrix)


def cluster_witness_plan(stabilizers: StabilizerSet | None = None) -> WitnessPlan:
    b = cluster_blocks(stabilizers)
    eye8 = np.eye(8)
    scale = 1 / (2 * math.sqrt(3))
    terms = [
        (MeasurementSetting.split("Z", "X", "Z^3 X^3"),
         -b["P_odd"] - 0.5 * np.kron(b["A0"], eye8)),
        (MeasurementSetting.split("X", "Z", "X^3 Z^3"),
         -b["P_even"] - 0.5 * np.kron(eye8, b["A0"])),
        (MeasurementSetting.split("Z", "M1", "Z^3 M(1)^3"), -scale * np.kron(b["A1"], b["M+"])),
        (MeasurementSetting.split("Z", "M-1", "Z^3 M(-1)^3"), -scale * np.kron(b["A1"], b["M-"])),
        (MeasurementSetting.split("M1", "Z", "M(1)^3 Z^3"), -scale * np.kron(b["M+"], b["A1"])),
        (MeasurementSetting.split("M-1", "Z", "M(-1)^3 Z^3"), -scale * np.kron(b["M-"], b["A1"])),
    ]
    observable = Observable(cluster_witness_matrix(), label="W_C_tilde")
    return _plan_from_terms("W_C_tilde", observable, cluster6(), terms, 1.5, bound=True)


def plan_by_name(name: str) -> WitnessPlan:
    if name in ("ghz", "W_G"):
        return ghz_witness_plan()
    if name in ("cluster", "W_C_tilde"):
        return cluster_witness_plan()
    raise KeyError(f"unknown witness plan {name!r}; choose ghz or cluster")


@dataclass(frozen=True)
class FidelityEstimate:
    value: float
    lower_bound: bool


def fidelity_from_witness(kind: str, value: float) -> FidelityEstimate:
    """GHZ: F = 1/2 - <W_G> exactly.  Cluster: F >= 1/2 - <W_C~>."""
    if kind in ("ghz", "W_G"):
        return FidelityEstimate(0.5 - value, lower_bound=False)
    if kind in ("cluster", "W_C_tilde"):
        return FidelityEstimate(0.5 - value, lower_bound=True)
    raise KeyError(f"unknown witness kind {kind!r}")


@dataclass(frozen=True)
class WitnessReport:
    witness: str
    value: float
    stderr: float
    fidelity_bound: float
    genuine_multipartite: bool
    sigmas_below_zero: float
    records: tuple = field(default=(), repr=False, compare=False)

    @classmethod
    def from_value(cls, witness: str, value: float, stderr: float, records=()) -> WitnessReport:
        if stderr > 0:
            sigmas = -value / stderr
        else:
            sigmas = math.copysign(math.inf, -value) if value != 0 else 0.0
        return cls(witness, float(value), float(stderr), 0.5 - float(value),
                   bool(value < 0), float(sigmas), tuple(records))

    def to_dict(self) -> dict:
        sig = self.sigmas_below_zero
        return {
            "schema": 1,
            "witness": self.witness,
            "value": self.value,
            "stderr": self.stderr,
            "fidelity_bound": self.fidelity_bound,
            "genuine_multipartite": self.genuine_multipartite,
            "sigmas_below_zero": sig if math.isfinite(sig) else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def white_noise_state(target: PureState | MixedState, p: float) -> MixedState:
    """p * target + (1 - p) * I / 2^n."""
    rho = target.density_matrix() if isinstance(target, PureState) else target
    return rho.mix(MixedState.maximally_mixed(rho.n_qubits), p)


def noise_threshold(plan: WitnessPlan, target: PureState | MixedState, xtol: float = 1e-13) -> float:
    """Noise level p* where the witness vanishes on p * target + (1 - p) * I/64."""
    if target.n_qubits != plan.observable.n_qubits:
        raise ValueError("target and witness act on different numbers of qubits")
    on_target = expectation(target, plan.observable)
    on_noise = float(np.trace(plan.observable.matrix).real) / plan.observable.dim

    def value(p: float) -> float:
        return p * on_target + (1 - p) * on_noise

    if value(0.0) * value(1.0) > 0 or value(0.0) == value(1.0):
        raise NoSignChangeError(f"witness {plan.name} keeps its sign on the white-noise family")
    return float(bisect(value, 0.0, 1.0, xtol=xtol))


def random_density_matrix(rng: np.random.Generator, dim: int = DIM, rank: int | None = None) -> MixedState:
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return MixedState(rho / np.trace(rho).real, check_psd=False)


def random_product_states(rng: np.random.Generator, count: int, n_qubits: int = N_QUBITS) -> np.ndarray:
    """``count`` Haar-random product states as a (count, 2^n) array."""
    singles = rng.normal(size=(count, n_qubits, 2)) + 1j * rng.normal(size=(count, n_qubits, 2))
    singles /= np.linalg.norm(singles, axis=2, keepdims=True)
    out = singles[:, 0, :]
    for q in range(1, n_qubits):
        out = np.einsum("ci,cj->cij", out, singles[:, q, :]).reshape(count, -1)
    return out


def product_state_minimum(observable: Observable, states: np.ndarray) -> float:
    values = np.einsum("ci,ij,cj->c", states.conj(), observable.matrix, states).real
    return float(values.min())


@dataclass
class WitnessDiagnostics:
    positivity_gap: float
    oracle_residual: float
    max_schmidt_weight: float
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures


def max_bipartition_weight(psi: PureState) -> float:
    """Largest squared Schmidt coefficient over every bipartition of the qubits."""
    n = psi.n_qubits
    best = 0.0
    # fixing qubit n on the complementary side visits each cut once
    for size in range(1, n):
        for part in itertools.combinations(range(1, n), size):
            best = max(best, schmidt_max_weight(psi, part))
    return best


def validate_witness(plan: WitnessPlan, n_random: int = 100, seed: int = 0,
                     strict: bool = True) -> WitnessDiagnostics:
    """Check positivity against the fidelity witness, the combiner, and the I/2 offset."""
    gap = min_eigenvalue(plan.observable - plan.reference())
    rng = np.random.default_rng(seed)
    residual = 0.0
    for _ in range(n_random):
        rho = random_density_matrix(rng)
        residual = max(residual, abs(plan.evaluate(rho) - expectation(rho, plan.observable)))
    schmidt = max_bipartition_weight(plan.target)
    failures = []
    if gap < -ATOL_EIG:
        failures.append("positivity")
    if residual > 1e-9:
        failures.append("oracle_residual")
    if schmidt > 0.5 + 1e-12:
        failures.append("biseparable_overlap")
    diagnostics = WitnessDiagnostics(gap, residual, schmidt, failures)
    if strict and failures:
        raise WitnessValidationError(failures)
    return diagnostics
