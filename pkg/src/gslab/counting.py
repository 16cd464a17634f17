"""Sixfold coincidence sampling and the statistics behind witness error bars.

Random numbers come from numpy's Philox4x32-10 counter-based generator keyed
through ``numpy.random.SeedSequence``.  The k-th setting of a protocol run
draws from ``SeedSequence(seed).spawn(k + 1)[k]``, so each record depends
only on ``(seed, k)`` and serial and parallel runs agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .optics import NoiseModel, fourfold_state
from .qalgebra import SIGMA_X, SIGMA_Y, MixedState, PureState
from .witness import MeasurementSetting, WitnessPlan, WitnessReport

DEFAULT_EVENTS = 64


@dataclass(frozen=True, eq=False)
class CountRecord:
    setting: MeasurementSetting
    counts: np.ndarray
    n_events: int
    seed: int | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (64,) or (counts < 0).any():
            raise ValueError("counts must be 64 nonnegative integers")
        if int(counts.sum()) != self.n_events:
            raise ValueError(f"counts sum to {counts.sum()}, not {self.n_events}")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def __eq__(self, other):
        return (isinstance(other, CountRecord) and self.setting == other.setting
                and self.n_events == other.n_events and self.seed == other.seed
                and np.array_equal(self.counts, other.counts))

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.n_events


@dataclass(frozen=True)
class EstimatedValue:
    mean: float
    stderr: float


def outcome_distribution(rho: PureState | MixedState, setting: MeasurementSetting) -> np.ndarray:
    """Born probabilities of the 64 joint outcomes, bit 0 meaning eigenvalue +1.

    Each local eigenbasis is reached by a rotation followed by an H/V analyzer,
    i.e. what the wave plates in front of each polarizer do.
    """
    p = setting.probabilities(rho)
    return p / p.sum()


def _generator(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def setting_seeds(seed: int, n_settings: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(n_settings)


def sample_counts(rho: PureState | MixedState, setting: MeasurementSetting,
                  n_events: int = DEFAULT_EVENTS, seed: int | np.random.SeedSequence = 0) -> CountRecord:
    if n_events < 1:
        raise ValueError("n_events must be >= 1")
    p = outcome_distribution(rho, setting)
    counts = _generator(seed).multinomial(n_events, p)
    label = seed if isinstance(seed, (int, np.integer)) else None
    return CountRecord(setting, counts, n_events, label)


def parity_expectation(record: CountRecord, sign_assignment: Sequence[int]) -> EstimatedValue:
    """Mean and plug-in standard error of a +-1/0 valued outcome function.

    Outcomes with sign 0 are dropped from both the mean and the event count.
    """
    signs = np.asarray(sign_assignment, dtype=float)
    if signs.shape != (64,):
        raise ValueError("sign assignment needs 64 entries")
    mask = signs != 0
    n_eff = int(record.counts[mask].sum())
    if n_eff == 0:
        raise ValueError("no events carry a nonzero sign")
    mean = float(signs[mask] @ record.counts[mask]) / n_eff
    second = float(signs[mask] ** 2 @ record.counts[mask]) / n_eff
    return EstimatedValue(mean, math.sqrt(max(second - mean ** 2, 0.0) / n_eff))


def linear_estimate(frequencies: np.ndarray, weights: np.ndarray, n_events: int) -> EstimatedValue:
    """Estimate of ``sum_k w_k p_k`` from multinomial frequencies over all events."""
    mean = float(weights @ frequencies)
    var = float((weights ** 2) @ frequencies) - mean ** 2
    return EstimatedValue(mean, math.sqrt(max(var, 0.0) / n_events))


def run_protocol(rho: PureState | MixedState, plan: WitnessPlan,
                 n_events_per_setting: int = DEFAULT_EVENTS, seed: int = 0,
                 analytic: bool = False) -> WitnessReport:
    """Measure every setting of ``plan`` and combine into a witness report.

    Settings are independent runs, so their variances add.  In analytic mode
    the exact distributions replace sampled frequencies and the error bar is
    the one expected for ``n_events_per_setting`` events.
    """
    if not plan.settings:
        raise ValueError("plan has no settings")
    value = plan.constant
    variance = 0.0
    records = []
    seeds = setting_seeds(seed, len(plan.settings))
    for setting, weights, sub in zip(plan.settings, plan.weights, seeds):
        if analytic:
            freq = outcome_distribution(rho, setting)
        else:
            record = sample_counts(rho, setting, n_events_per_setting, sub)
            records.append(record)
            freq = record.frequencies
        est = linear_estimate(freq, weights, n_events_per_setting)
        value += est.mean
        variance += est.stderr ** 2
    return WitnessReport.from_value(plan.name, value, math.sqrt(variance), records)


def fringe_scan(rho4: MixedState | PureState, n_points: int = 181) -> list[tuple[float, float]]:
    """Exact ``<M_phi^4>`` with ``M_phi = cos(phi) X + sin(phi) Y`` for phi in [0, pi]."""
    if rho4.n_qubits != 4:
        raise ValueError(f"fringe scan needs a 4-qubit state, got {rho4.n_qubits}")
    if n_points < 2:
        raise ValueError("need at least two points")
    rho = rho4.density_matrix() if isinstance(rho4, PureState) else rho4
    out = []
    for phi in np.linspace(0.0, math.pi, n_points):
        m = math.cos(phi) * SIGMA_X + math.sin(phi) * SIGMA_Y
        op = np.kron(np.kron(m, m), np.kron(m, m))
        out.append((float(phi), float(np.einsum("ij,ji->", op, rho.matrix).real)))
    return out


def fringe_visibility(scan: Sequence[tuple[float, float]]) -> float:
    """Visibility (max - min)/(max + min) of the cos(4 phi) coincidence fringe.

    The expectation contains harmonics 0, 2 and 4 in phi; only the fourth comes
    from the four-photon GHZ coherence.  Its amplitude is extracted by a
    discrete Fourier sum over one period and the coincidence rate ``1 + a
    cos(4 phi + c)`` then has visibility ``a``.  The grid must be uniform.
    """
    phis = np.array([p for p, _ in scan])
    vals = np.array([v for _, v in scan])
    if math.isclose(phis[-1] - phis[0], math.pi, abs_tol=1e-12):
        phis, vals = phis[:-1], vals[:-1]
    if len(phis) < 9:
        raise ValueError("need at least 9 distinct points per period to resolve cos(4 phi)")
    amp = abs(2 / len(phis) * np.sum(vals * np.exp(-4j * phis)))
    top, bottom = 1 + amp, 1 - amp
    return float((top - bottom) / (top + bottom))


def calibrate_overlap(target_visibility: float, pair_noise: NoiseModel | None = None,
                      n_points: int = 181) -> float:
    """Fusion overlap whose fourfold fringe has ``target_visibility``.

    The fringe amplitude is linear in the overlap, so one scan at full overlap
    fixes the answer.
    """
    full = fringe_visibility(fringe_scan(fourfold_state(pair_noise, 1.0), n_points))
    v = target_visibility / full
    if not 0.0 <= v <= 1.0 + 1e-12:
        raise ValueError(f"visibility {target_visibility} needs overlap {v:.4f} outside [0, 1]")
    return min(v, 1.0)


PAIR_VISIBILITIES = (0.93, 0.91)
FOURFOLD_VISIBILITIES = (0.73, 0.71)


def calibrated_noise(joint_calibration: bool = False) -> NoiseModel:
    """Noise profile matching the reported pair and fourfold visibilities.

    By default each fusion overlap is calibrated on a fringe of ideal pairs,
    isolating distinguishability from pair noise.  ``joint_calibration``
    instead calibrates the fringe of the noisy pairs, which attributes less of
    the fourfold visibility loss to the fusions.
    """
    v_hv, v_pm = PAIR_VISIBILITIES
    pairs = NoiseModel(v_hv=v_hv, v_pm=v_pm)
    reference = pairs if joint_calibration else None
    overlaps = tuple(calibrate_overlap(t, reference) for t in FOURFOLD_VISIBILITIES)
    return NoiseModel(v_hv=v_hv, v_pm=v_pm, overlap=overlaps)
