"""Linear-optical preparation of six-photon GHZ and cluster states.

Three EPR sources feed photons 2/3 and 4/5 into polarizing beam splitters.
Conditioning on one photon in each of the six outputs applies the parity
filter ``|HH><HH| + |VV><VV|`` to each fused pair.  Two imperfections are
modelled on top of that ideal picture: noisy pairs plus partial
distinguishability at each fusion (density-matrix pipeline), and double pair
emission (photon-number pipeline, :func:`higher_order_coincidences`).
"""

from __future__ import annotations

import itertools
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .qalgebra import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    MixedState,
    PureState,
    apply_unitary,
    embed,
    permute_qubits,
    tensor,
)

N_MODES = 6


class ConfigError(ValueError):
    """Setup or noise description is inconsistent."""


class EmptyPostselectionError(RuntimeError):
    """Post-selection removed the entire state."""


@dataclass(frozen=True)
class NoiseModel:
    v_hv: float = 1.0
    v_pm: float = 1.0
    overlap: tuple[float, ...] | None = None
    lam: float = 0.0

    def __post_init__(self):
        for name in ("v_hv", "v_pm"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name}={value} outside [0, 1]")
        if self.overlap is not None:
            ov = tuple(float(v) for v in self.overlap)
            if any(not 0.0 <= v <= 1.0 for v in ov):
                raise ConfigError(f"fusion overlaps {ov} outside [0, 1]")
            object.__setattr__(self, "overlap", ov)
        if self.lam < 0:
            raise ConfigError("pair amplitude must be >= 0")

    @classmethod
    def ideal(cls) -> NoiseModel:
        return cls()

    def overlaps_for(self, n_fusions: int) -> tuple[float, ...]:
        if self.overlap is None:
            return (1.0,) * n_fusions
        if len(self.overlap) != n_fusions:
            raise ConfigError(f"{len(self.overlap)} overlaps given for {n_fusions} fusions")
        return self.overlap

    @classmethod
    def from_dict(cls, data: dict | None) -> NoiseModel:
        data = dict(data or {})
        unknown = set(data) - {"v_hv", "v_pm", "overlap", "lambda", "schema"}
        if unknown:
            raise ConfigError(f"unknown noise fields {sorted(unknown)}")
        overlap = data.get("overlap")
        return cls(
            v_hv=float(data.get("v_hv", 1.0)),
            v_pm=float(data.get("v_pm", 1.0)),
            overlap=None if overlap is None else tuple(overlap),
            lam=float(data.get("lambda", 0.0)),
        )

    def to_dict(self) -> dict:
        return {
            "v_hv": self.v_hv,
            "v_pm": self.v_pm,
            "overlap": None if self.overlap is None else list(self.overlap),
            "lambda": self.lam,
        }


@dataclass(frozen=True)
class Waveplate:
    mode: int
    kind: str
    deg: float


@dataclass(frozen=True)
class SetupConfig:
    sources: tuple[tuple[int, int], ...] = ((1, 2), (3, 4), (5, 6))
    waveplates: tuple[Waveplate, ...] = ()
    fusions: tuple[tuple[int, int], ...] = ((2, 3), (4, 5))
    postselect: bool = True
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(tuple(s) for s in self.sources))
        object.__setattr__(self, "fusions", tuple(tuple(f) for f in self.fusions))
        object.__setattr__(self, "waveplates", tuple(self.waveplates))
        self.validate()

    def validate(self):
        used = [m for pair in self.sources for m in pair]
        if sorted(used) != list(range(1, N_MODES + 1)):
            raise ConfigError(f"sources must cover modes 1..{N_MODES} exactly once, got {used}")
        if any(len(s) != 2 for s in self.sources):
            raise ConfigError("each source emits into exactly two modes")
        fused = [m for pair in self.fusions for m in pair]
        if any(len(f) != 2 or f[0] == f[1] for f in self.fusions):
            raise ConfigError(f"fusions must join two distinct modes: {self.fusions}")
        if len(set(fused)) != len(fused):
            raise ConfigError(f"fusion pairs overlap: {self.fusions}")
        if any(not 1 <= m <= N_MODES for m in fused):
            raise ConfigError(f"fusion mode outside 1..{N_MODES}")
        for wp in self.waveplates:
            if not 1 <= wp.mode <= N_MODES:
                raise ConfigError(f"wave plate on unknown mode {wp.mode}")
            if wp.kind not in ("HWP", "QWP"):
                raise ConfigError(f"unknown wave plate kind {wp.kind!r}")

    @classmethod
    def preset(cls, name: str) -> SetupConfig:
        if name == "ghz6":
            # the caption's 0-degree plate is treated as absent: HWP(0) = diag(1,-1)
            # would turn the pair into |Phi->
            return cls(name="ghz6")
        if name == "cluster6":
            return cls(waveplates=(Waveplate(4, "HWP", 22.5),), name="cluster6")
        raise ConfigError(f"unknown preset {name!r}; choose ghz6 or cluster6")

    @classmethod
    def from_dict(cls, data: dict) -> tuple[SetupConfig, NoiseModel]:
        """Parse the JSON setup schema; returns the config and its noise model."""
        data = dict(data)
        known = {"preset", "sources", "waveplates", "fusions", "postselect", "noise", "schema"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        base = cls.preset(data["preset"]) if data.get("preset") else cls()
        kwargs = {}
        if "sources" in data:
            kwargs["sources"] = tuple(tuple(s) for s in data["sources"])
        if "waveplates" in data:
            try:
                kwargs["waveplates"] = tuple(
                    Waveplate(int(w["mode"]), str(w["kind"]), float(w["deg"]))
                    for w in data["waveplates"]
                )
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"bad wave plate entry: {exc}") from None
        if "fusions" in data:
            kwargs["fusions"] = tuple(tuple(f) for f in data["fusions"])
        if "postselect" in data:
            kwargs["postselect"] = bool(data["postselect"])
        config = replace(base, **kwargs) if kwargs else base
        return config, NoiseModel.from_dict(data.get("noise"))

    @classmethod
    def from_json(cls, text: str) -> tuple[SetupConfig, NoiseModel]:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config JSON error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(data)


@dataclass(frozen=True, eq=False)
class FusionOutcome:
    state: MixedState
    success_probability: float


def epr_pair(noise: NoiseModel | None = None) -> MixedState:
    """Noisy |Phi+> with <ZZ> = v_hv and <XX> = v_pm.

    The noise is an independent bit flip and dephasing on one photon, which
    leaves the state Bell-diagonal with <YY> = -v_hv * v_pm.
    """
    noise = noise or NoiseModel()
    c, a = noise.v_hv, noise.v_pm
    b = -a * c
    mat = (np.eye(4) + a * np.kron(SIGMA_X, SIGMA_X) + b * np.kron(SIGMA_Y, SIGMA_Y)
           + c * np.kron(SIGMA_Z, SIGMA_Z)) / 4
    return MixedState(mat)


def waveplate_unitary(kind: str, theta_deg: float) -> np.ndarray:
    """Jones matrix of a wave plate with its fast axis at ``theta_deg`` from H."""
    t = math.radians(theta_deg)
    rot = np.array([[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]], dtype=complex)
    if kind == "HWP":
        retarder = np.diag([1, -1]).astype(complex)
    elif kind == "QWP":
        retarder = np.diag([1, 1j])
    else:
        raise ValueError(f"unknown wave plate kind {kind!r}")
    return rot.T @ retarder @ rot


def _parity_projectors(mode_a: int, mode_b: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    p_hh = embed(np.diag([1, 0, 0, 0]).astype(complex), [mode_a, mode_b], n)
    p_vv = embed(np.diag([0, 0, 0, 1]).astype(complex), [mode_a, mode_b], n)
    return p_hh, p_vv


def pbs_fusion(state: PureState | MixedState, mode_a: int, mode_b: int,
               overlap: float = 1.0) -> FusionOutcome:
    """Fuse two modes at a PBS and keep the one-photon-per-output events.

    ``overlap`` is the indistinguishability of the two photons: 1 applies the
    coherent filter K = |HH><HH| + |VV><VV|, 0 keeps only the two parity
    branches without coherence between them.
    """
    if isinstance(state, PureState):
        state = state.density_matrix()
    n = state.n_qubits
    if mode_a == mode_b or not (1 <= mode_a <= n and 1 <= mode_b <= n):
        raise ConfigError(f"invalid fusion modes ({mode_a}, {mode_b}) for {n} qubits")
    if not 0.0 <= overlap <= 1.0:
        raise ConfigError(f"overlap {overlap} outside [0, 1]")
    rho = state.matrix
    p_hh, p_vv = _parity_projectors(mode_a, mode_b, n)
    k = p_hh + p_vv
    incoherent = p_hh @ rho @ p_hh + p_vv @ rho @ p_vv
    out = overlap * (k @ rho @ k) + (1 - overlap) * incoherent
    prob = float(np.trace(out).real)
    if prob <= 1e-15:
        raise EmptyPostselectionError(f"fusion of modes {mode_a},{mode_b} has zero success probability")
    out = (out + out.conj().T) / (2 * prob)
    return FusionOutcome(MixedState(out), prob)


def _source_state(config: SetupConfig, noise: NoiseModel) -> MixedState:
    pair = epr_pair(noise)
    rho = tensor([pair] * len(config.sources))
    produced = [m for s in config.sources for m in s]
    # qubit i of rho carries mode produced[i-1]; reorder so qubit k is mode k
    order = [produced.index(m) + 1 for m in range(1, N_MODES + 1)]
    return permute_qubits(rho, order)


def build_setup(config: SetupConfig, noise: NoiseModel | None = None) -> FusionOutcome:
    """Sources, then wave plates, then fusions in order, then post-selection."""
    noise = noise or NoiseModel()
    if not config.postselect:
        raise ConfigError("only post-selected operation (one photon per output) is representable")
    rho = _source_state(config, noise)
    for wp in config.waveplates:
        rho = apply_unitary(rho, waveplate_unitary(wp.kind, wp.deg), [wp.mode])
    prob = 1.0
    for (a, b), v in zip(config.fusions, noise.overlaps_for(len(config.fusions))):
        outcome = pbs_fusion(rho, a, b, v)
        rho = outcome.state
        prob *= outcome.success_probability
    return FusionOutcome(rho, prob)


def fourfold_state(noise: NoiseModel | None = None, overlap: float = 1.0) -> MixedState:
    """Four photons from two sources fused once: the state behind a fourfold fringe."""
    pair = epr_pair(noise)
    return pbs_fusion(tensor([pair, pair]), 2, 3, overlap).state


# Photon-number model of double pair emission.  Modes are indexed
# 2*(spatial - 1) + polarization with H = 0, V = 1.

def _mode(spatial: int, pol: int) -> int:
    return 2 * (spatial - 1) + pol


def network_matrix(config: SetupConfig) -> np.ndarray:
    """12x12 map of input creation operators to detected-mode creation operators."""
    t = np.eye(2 * N_MODES, dtype=complex)
    for wp in config.waveplates:
        u = np.eye(2 * N_MODES, dtype=complex)
        idx = [_mode(wp.mode, 0), _mode(wp.mode, 1)]
        u[np.ix_(idx, idx)] = waveplate_unitary(wp.kind, wp.deg)
        t = u @ t
    for a, b in config.fusions:
        # H is transmitted, V reflected: the V components swap spatial modes
        perm = np.eye(2 * N_MODES, dtype=complex)
        va, vb = _mode(a, 1), _mode(b, 1)
        perm[[va, vb]] = perm[[vb, va]]
        t = perm @ t
    return t


Poly = dict  # occupation tuple -> coefficient


def _poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = defaultdict(complex)
    for ka, ca in p.items():
        for kb, cb in q.items():
            out[tuple(x + y for x, y in zip(ka, kb))] += ca * cb
    return {k: c for k, c in out.items() if abs(c) > 1e-15}


def _pair_operator(t: np.ndarray, mode_a: int, mode_b: int) -> Poly:
    """sum_p (T a+)_{a,p} (T a+)_{b,p} as a quadratic polynomial."""
    out: Poly = defaultdict(complex)
    dim = t.shape[0]
    for pol in (0, 1):
        col_a = t[:, _mode(mode_a, pol)]
        col_b = t[:, _mode(mode_b, pol)]
        for i in np.flatnonzero(np.abs(col_a) > 1e-15):
            for j in np.flatnonzero(np.abs(col_b) > 1e-15):
                occ = [0] * dim
                occ[i] += 1
                occ[j] += 1
                out[tuple(occ)] += col_a[i] * col_b[j]
    return dict(out)


def _click_outcomes(occupation: Sequence[int]) -> list[int]:
    """Registered sixfold outcomes (bit index) for one Fock configuration.

    Each output has an H and a V threshold detector; every combination of one
    clicking detector per output is a registered sixfold event.
    """
    per_mode = []
    for spatial in range(1, N_MODES + 1):
        clicks = [pol for pol in (0, 1) if occupation[_mode(spatial, pol)] > 0]
        if not clicks:
            return []
        per_mode.append(clicks)
    outcomes = []
    for combo in itertools.product(*per_mode):
        outcomes.append(int("".join(map(str, combo)), 2))
    return outcomes


def emission_patterns(max_pairs: int = 4, max_per_source: int = 2, min_pairs: int = 3):
    return [p for p in itertools.product(range(max_per_source + 1), repeat=3)
            if min_pairs <= sum(p) <= max_pairs]


def pattern_fock_distribution(config: SetupConfig, pattern: Sequence[int]) -> dict:
    """Unnormalized output Fock probabilities for fixed pair numbers per source.

    The n-pair emission of a source is ``(a_H+ b_H+ + a_V+ b_V+)^n / n!`` acting on
    vacuum, the n-th term of the low-gain expansion of the squeezer.
    """
    t = network_matrix(config)
    poly: Poly = {(0,) * (2 * N_MODES): 1.0 + 0j}
    for (ma, mb), n in zip(config.sources, pattern):
        pair = _pair_operator(t, ma, mb)
        term: Poly = {(0,) * (2 * N_MODES): 1.0 + 0j}
        for _ in range(n):
            term = _poly_mul(term, pair)
        scale = 1 / math.factorial(n)
        poly = _poly_mul(poly, {k: c * scale for k, c in term.items()})
    probs = {}
    for occ, c in poly.items():
        weight = abs(c) ** 2 * math.prod(math.factorial(m) for m in occ)
        if weight > 1e-18:
            probs[occ] = weight
    return probs


def pattern_click_weights(config: SetupConfig, pattern: Sequence[int]) -> np.ndarray:
    weights = np.zeros(1 << N_MODES)
    for occ, p in sorted(pattern_fock_distribution(config, pattern).items()):
        for outcome in _click_outcomes(occ):
            weights[outcome] += p
    return weights


def higher_order_coincidences(lam: float, preset: str | SetupConfig = "ghz6",
                              max_pairs: int = 4) -> np.ndarray:
    """Sixfold H/V outcome distribution including double pair emission.

    Patterns of per-source pair numbers with 3 or 4 pairs in total (at most two
    per source) are weighted by ``lam ** (2 * total)``: ``lam`` is the pair
    amplitude, so four-pair events enter at relative order ``lam**2``.
    """
    if not 0.0 <= lam <= 0.3:
        raise ConfigError(f"pair amplitude {lam} outside [0, 0.3]")
    config = SetupConfig.preset(preset) if isinstance(preset, str) else preset
    total = np.zeros(1 << N_MODES)
    for pattern in emission_patterns(max_pairs=max_pairs):
        w = pattern_click_weights(config, pattern)
        if w.any():
            total += lam ** (2 * sum(pattern)) * w if lam > 0 else (sum(pattern) == 3) * w
    norm = total.sum()
    if norm <= 0:
        raise EmptyPostselectionError("no sixfold coincidences in the emission model")
    return total / norm
