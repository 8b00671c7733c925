"""Drive calibration against simulated experiment backends.

Chevron characterization of pairwise couplings, amplitude targeting by
monotone inversion of measured J(A) curves, and closed-loop optimization
of all simultaneous drives.  Frequencies and couplings are angular
(rad/s) throughout this module; the Hz conversion happens only at the
device-model and file boundaries.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Protocol

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import least_squares

from .models import chains
from .models import device as device_models

TWO_PI = 2.0 * math.pi


class FitError(RuntimeError):
    """Raised when a chevron dataset cannot be fitted acceptably."""


class TargetRangeError(ValueError):
    """Raised when a requested coupling lies outside the measured range."""


@dataclass(frozen=True)
class CouplerDrive:
    """One parametric drive: which coupler, amplitude, angular frequency."""

    coupler: int
    amplitude: float
    frequency: float

    def __post_init__(self):
        if self.coupler < 1:
            raise ValueError("coupler index is 1-based")
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")


@dataclass(frozen=True)
class DriveSettings:
    """Amplitude and angular frequency for every coupler of a chain."""

    amplitudes: tuple
    frequencies: tuple

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "frequencies", tuple(float(f) for f in self.frequencies))
        if len(self.amplitudes) != len(self.frequencies):
            raise ValueError("amplitude and frequency lists differ in length")
        if not self.amplitudes:
            raise ValueError("empty drive settings")

    @property
    def n_drives(self) -> int:
        return len(self.amplitudes)

    def as_dict(self) -> dict:
        return {"amplitudes": list(self.amplitudes), "frequencies": list(self.frequencies)}


class ExperimentBackend(Protocol):
    """Minimal interface every backend provides.

    Both capabilities are pure functions of their arguments and the
    backend's seed, so repeated calls return bit-identical data and may
    run concurrently.
    """

    seed: int

    def run_pair(self, pair, drive: CouplerDrive, times, background=()) -> np.ndarray:
        """Two-site populations (len(times), 2) for one driven pair."""

    def run_chain(self, drives: DriveSettings, initial: int, times) -> np.ndarray:
        """All-site populations (len(times), n) under simultaneous drives."""


# ---------------------------------------------------------------------------
# effective backend: exchange chain with injected J(A) map and Stark shifts

@dataclass(frozen=True)
class EffectiveChainConfig:
    """Parameters of the effective exchange model.

    ``coupling_slopes[b]`` converts drive amplitude to J for coupler b;
    ``bare_resonances[b]`` is the drive frequency that is resonant at
    vanishing amplitude; ``stark[b][b']`` shifts resonance b by that
    coefficient times A_{b'}^2, emulating first-order drive-induced
    frequency shifts (own drive and neighbours).
    """

    tau: float
    coupling_slopes: tuple
    bare_resonances: tuple
    stark: tuple = ()
    noise: float = 0.0
    label: str = "effective-chain"

    def __post_init__(self):
        object.__setattr__(self, "coupling_slopes", tuple(float(c) for c in self.coupling_slopes))
        object.__setattr__(self, "bare_resonances", tuple(float(w) for w in self.bare_resonances))
        object.__setattr__(self, "stark", tuple(tuple(float(s) for s in row) for row in self.stark))
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if len(self.coupling_slopes) != len(self.bare_resonances):
            raise ValueError("slope and resonance lists differ in length")
        if any(c <= 0 for c in self.coupling_slopes):
            raise ValueError("coupling slopes must be positive")
        if self.stark and (len(self.stark) != self.n_drives
                           or any(len(row) != self.n_drives for row in self.stark)):
            raise ValueError("stark matrix must be square over the drives")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")

    @property
    def n_drives(self) -> int:
        return len(self.coupling_slopes)

    @property
    def n_sites(self) -> int:
        return self.n_drives + 1

    def resonances(self, amplitudes) -> np.ndarray:
        """Stark-shifted drive resonances for the given amplitude vector."""
        amps = np.asarray(amplitudes, dtype=float)
        if amps.shape != (self.n_drives,):
            raise ValueError(f"expected {self.n_drives} amplitudes")
        res = np.array(self.bare_resonances)
        if self.stark:
            res = res + np.array(self.stark) @ (amps * amps)
        return res


def default_effective_config(tau: float = 640e-9, noise: float = 0.0) -> EffectiveChainConfig:
    """Six-site effective chain at superconducting-device scales."""
    slopes = TWO_PI * np.array([88.0, 104.0, 119.0, 97.0, 91.0]) * 1e6
    bare = TWO_PI * np.array([440.0, 342.0, 52.0, 390.0, 620.0]) * 1e6
    stark = np.zeros((5, 5))
    for b in range(5):
        stark[b, b] = -TWO_PI * 6.0e9
        if b > 0:
            stark[b, b - 1] = -TWO_PI * 2.2e9
        if b < 4:
            stark[b, b + 1] = -TWO_PI * 2.2e9
    return EffectiveChainConfig(tau=tau, coupling_slopes=tuple(slopes),
                                bare_resonances=tuple(bare),
                                stark=tuple(map(tuple, stark)), noise=noise)


def _entropy(*parts) -> int:
    """Stable 64-bit hash of call arguments, for per-call noise streams."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        if isinstance(p, np.ndarray):
            h.update(repr(p.shape).encode())
            h.update(np.ascontiguousarray(p, dtype=float).tobytes())
        else:
            h.update(repr(p).encode())
    return int.from_bytes(h.digest(), "big")


@dataclass
class EffectiveBackend:
    """Single-excitation exchange chain with drive-dependent detunings.

    Pair b couples sites b and b+1 with J = slope_b * A_b; the drive
    detuning from the (Stark-shifted) resonance tilts the site energies,
    so simultaneous drives interact through the stark matrix exactly as
    the closed-loop optimizer must learn to compensate.
    """

    config: EffectiveChainConfig = field(default_factory=default_effective_config)
    seed: int = 0

    @property
    def tau(self) -> float:
        return self.config.tau

    @property
    def n_sites(self) -> int:
        return self.config.n_sites

    def pair_coupler(self, pair) -> int:
        a, b = pair
        if b != a + 1 or not 1 <= a <= self.config.n_drives:
            raise ValueError(f"pair {pair} is not an adjacent pair of this chain")
        return a

    def _noise(self, shape, *key):
        if self.config.noise == 0.0:
            return 0.0
        rng = np.random.default_rng([self.seed, _entropy(*key)])
        return rng.normal(0.0, self.config.noise, shape)

    def _amplitude_vector(self, drive: CouplerDrive, background) -> np.ndarray:
        amps = np.zeros(self.config.n_drives)
        amps[drive.coupler - 1] = drive.amplitude
        for bg in background:
            if bg.coupler == drive.coupler:
                raise ValueError("background drive collides with the scanned coupler")
            if not 1 <= bg.coupler <= self.config.n_drives:
                raise ValueError(f"no coupler {bg.coupler} in this chain")
            amps[bg.coupler - 1] = bg.amplitude
        return amps

    def run_pair_scan(self, pair, amplitude: float, frequencies, times,
                      background=()) -> np.ndarray:
        """Target-site population (len(frequencies), len(times))."""
        b = self.pair_coupler(pair)
        drive = CouplerDrive(b, amplitude, 0.0)
        amps = self._amplitude_vector(drive, background)
        freqs = np.asarray(frequencies, dtype=float)
        t = np.asarray(times, dtype=float)
        res = self.config.resonances(amps)[b - 1]
        coupling = self.config.coupling_slopes[b - 1] * amplitude
        half = 0.5 * (freqs - res)[:, None]
        rabi2 = coupling * coupling + half * half
        safe = np.where(rabi2 == 0.0, 1.0, rabi2)
        pops = (coupling * coupling / safe) * np.sin(np.sqrt(safe) * t[None, :]) ** 2
        pops = pops + self._noise(pops.shape, "pair_scan", pair, amplitude, freqs, t,
                                  tuple(background))
        return np.clip(pops, 0.0, 1.0)

    def run_pair(self, pair, drive: CouplerDrive, times, background=()) -> np.ndarray:
        b = self.pair_coupler(pair)
        if drive.coupler != b:
            raise ValueError(f"drive addresses coupler {drive.coupler}, pair needs {b}")
        target = self.run_pair_scan(pair, drive.amplitude, [drive.frequency], times,
                                    background)[0]
        return np.column_stack([1.0 - target, target])

    def _chain_hamiltonian(self, drives: DriveSettings) -> np.ndarray:
        if drives.n_drives != self.config.n_drives:
            raise ValueError(f"expected {self.config.n_drives} drives")
        amps = np.asarray(drives.amplitudes)
        res = self.config.resonances(amps)
        couplings = np.array(self.config.coupling_slopes) * amps
        # each drive's detuning tilts everything downstream of its pair
        energies = np.zeros(self.config.n_sites)
        for b in range(self.config.n_drives):
            energies[b + 1] = energies[b] + (res[b] - drives.frequencies[b])
        h = np.diag(energies).astype(complex)
        idx = np.arange(self.config.n_drives)
        h[idx, idx + 1] = couplings
        h[idx + 1, idx] = couplings
        return h

    def run_chain(self, drives: DriveSettings, initial: int, times) -> np.ndarray:
        n = self.config.n_sites
        if not 1 <= initial <= n:
            raise ValueError(f"initial site {initial} outside chain of {n}")
        t = np.asarray(times, dtype=float)
        h = self._chain_hamiltonian(drives)
        w, v = np.linalg.eigh(h)
        amp0 = v.conj().T[:, initial - 1]
        phases = np.exp(-1j * np.outer(t, w))
        pops = np.abs(phases * amp0 @ v.T) ** 2
        pops = pops + self._noise(pops.shape, "chain", drives.amplitudes,
                                  drives.frequencies, initial, t)
        return np.clip(pops, 0.0, 1.0)


def ideal_drive_settings(config: EffectiveChainConfig) -> DriveSettings:
    """Drives that realize exact mirror transfer on the effective model."""
    spec = chains.ChainSpec.pst(config.n_sites, config.tau)
    amps = np.array(spec.couplings) / np.array(config.coupling_slopes)
    freqs = config.resonances(amps)
    return DriveSettings(tuple(amps), tuple(freqs))


def perturb_drives(settings: DriveSettings, seed: int,
                   amplitude_scale: float = 0.2,
                   frequency_offset: float = TWO_PI * 200e3) -> DriveSettings:
    """Random miscalibration: relative on amplitudes, absolute on frequencies."""
    rng = np.random.default_rng(seed)
    m = settings.n_drives
    amps = np.array(settings.amplitudes) * (1.0 + rng.uniform(-amplitude_scale,
                                                              amplitude_scale, m))
    freqs = np.array(settings.frequencies) + rng.uniform(-frequency_offset,
                                                         frequency_offset, m)
    return DriveSettings(tuple(amps), tuple(freqs))


# ---------------------------------------------------------------------------
# device backend: the circuit-level model, restricted to small subsets

def _bridging_coupler(device, pair) -> int:
    for j in range(1, len(device.couplers) + 1):
        if set(device.coupler_qubits(j)) == set(pair):
            return j
    raise ValueError(f"no coupler bridges qubits {pair}")


@dataclass
class DeviceBackend:
    """Runs pair and short-chain experiments on the transmon-level model.

    Subsets are limited to three qubits; anything larger trips the
    truncated-model resource guard by design.
    """

    device: object = None
    chain_qubits: tuple = (1, 2, 3)
    tau: float = 640e-9
    levels: int = 3
    seed: int = 0
    dt: float | None = None

    def __post_init__(self):
        if self.device is None:
            self.device = device_models.default_device()
        self.chain_qubits = tuple(self.chain_qubits)
        if len(self.chain_qubits) > 3:
            raise device_models.ResourceError(
                "device backend chains are limited to 3 qubits")

    @property
    def n_sites(self) -> int:
        return len(self.chain_qubits)

    def pair_coupler(self, pair) -> int:
        return _bridging_coupler(self.device, pair)

    def _level_one_masks(self, model, qubit_positions):
        occ = model.occupations()
        return [occ[:, pos] == 1 for pos in qubit_positions]

    def _pair_probs(self, pair, amplitude, frequencies, times, background):
        """Full-space probabilities for a driven pair, plus the model."""
        freqs = np.asarray(frequencies, dtype=float)
        t = np.asarray(times, dtype=float)
        j = self.pair_coupler(pair)
        qubits = list(self.device.coupler_qubits(j))
        couplers = [j]
        static = []
        for bg in background:
            couplers.append(bg.coupler)
            static.append(device_models.DriveConfig(
                coupler=bg.coupler, amplitude=bg.amplitude,
                frequency_hz=bg.frequency / TWO_PI))
            for q in self.device.coupler_qubits(bg.coupler):
                if q not in qubits:
                    qubits.append(q)
        if len(qubits) > 3:
            raise device_models.ResourceError(
                "background drives would need more than 3 qubits")
        model = device_models.DeviceSubsetModel(
            self.device, qubits, couplers, drives=static, levels=self.levels)
        psi0 = np.zeros(model.dim, dtype=complex)
        psi0[model.bare_index({("q", pair[0]): 1})] = 1.0
        base = device_models.DriveConfig(coupler=j, amplitude=amplitude,
                                         frequency_hz=1.0)
        probs = model.evolve_columns(psi0, t, freqs / TWO_PI, base, dt=self.dt)
        return probs, model, qubits

    def run_pair_scan(self, pair, amplitude: float, frequencies, times,
                      background=()) -> np.ndarray:
        probs, model, qubits = self._pair_probs(pair, amplitude, frequencies,
                                                times, background)
        mask = self._level_one_masks(model, [qubits.index(pair[1])])[0]
        return probs[:, mask, :].sum(axis=1).T

    def run_pair(self, pair, drive: CouplerDrive, times, background=()) -> np.ndarray:
        j = self.pair_coupler(pair)
        if drive.coupler != j:
            raise ValueError(f"drive addresses coupler {drive.coupler}, pair needs {j}")
        probs, model, qubits = self._pair_probs(pair, drive.amplitude,
                                                [drive.frequency], times, background)
        masks = self._level_one_masks(model, [qubits.index(q) for q in pair])
        return np.column_stack([probs[:, m, :].sum(axis=1)[:, 0] for m in masks])

    def run_chain(self, drives: DriveSettings, initial: int, times) -> np.ndarray:
        qubits = self.chain_qubits
        n = len(qubits)
        if drives.n_drives != n - 1:
            raise ValueError(f"expected {n - 1} drives for {n} qubits")
        if not 1 <= initial <= n:
            raise ValueError(f"initial site {initial} outside chain of {n}")
        t = np.asarray(times, dtype=float)
        couplers = [_bridging_coupler(self.device, (qubits[k], qubits[k + 1]))
                    for k in range(n - 1)]
        static = [device_models.DriveConfig(coupler=couplers[k],
                                            amplitude=drives.amplitudes[k],
                                            frequency_hz=drives.frequencies[k] / TWO_PI)
                  for k in range(n - 2)]
        model = device_models.DeviceSubsetModel(self.device, qubits, couplers,
                                                drives=static, levels=self.levels)
        psi0 = np.zeros(model.dim, dtype=complex)
        psi0[model.bare_index({("q", qubits[initial - 1]): 1})] = 1.0
        base = device_models.DriveConfig(coupler=couplers[-1],
                                         amplitude=drives.amplitudes[-1],
                                         frequency_hz=1.0)
        probs = model.evolve_columns(
            psi0, t, np.array([drives.frequencies[-1]]) / TWO_PI, base, dt=self.dt)
        masks = self._level_one_masks(model, range(n))
        return np.column_stack([probs[:, m, :].sum(axis=1)[:, 0] for m in masks])


# ---------------------------------------------------------------------------
# chevron characterization

@dataclass
class ChevronDataset:
    """Target-site populations over an (amplitude, frequency, time) grid."""

    pair: tuple
    amplitudes: np.ndarray
    frequencies: np.ndarray
    times: np.ndarray
    populations: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=float)
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.times = np.asarray(self.times, dtype=float)
        self.populations = np.asarray(self.populations, dtype=float)
        expected = (self.amplitudes.size, self.frequencies.size, self.times.size)
        if self.populations.shape != expected:
            raise ValueError(f"population grid {self.populations.shape} != {expected}")
        if self.populations.min() < -1e-9 or self.populations.max() > 1 + 1e-9:
            raise ValueError("populations outside [0, 1]")

    def as_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "amplitudes": self.amplitudes.tolist(),
            "frequencies": self.frequencies.tolist(),
            "times": self.times.tolist(),
            "populations": self.populations.tolist(),
            "label": self.label,
        }


def chevron_scan(backend, pair, amplitudes, frequencies, times,
                 neighbor_drives=(), label: str = "") -> ChevronDataset:
    """Measure the driven pair over the full (A, frequency, time) grid.

    ``neighbor_drives`` adds the adjacent couplers' drives at fixed
    parameters during every scan point, for characterization under the
    same conditions the simultaneous-drive experiment will see.
    """
    amps = np.atleast_1d(np.asarray(amplitudes, dtype=float))
    freqs = np.atleast_1d(np.asarray(frequencies, dtype=float))
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if amps.size == 0 or freqs.size == 0 or t.size == 0:
        raise ValueError("empty scan grid")
    pops = np.empty((amps.size, freqs.size, t.size))
    if hasattr(backend, "run_pair_scan"):
        for ia, amp in enumerate(amps):
            pops[ia] = backend.run_pair_scan(pair, amp, freqs, t, neighbor_drives)
    else:
        coupler = backend.pair_coupler(pair)
        for ia, amp in enumerate(amps):
            for iw, w in enumerate(freqs):
                drive = CouplerDrive(coupler, amp, w)
                pops[ia, iw] = backend.run_pair(pair, drive, t, neighbor_drives)[:, 1]
    return ChevronDataset(tuple(pair), amps, freqs, t, np.clip(pops, 0.0, 1.0), label)


class ChevronFit(NamedTuple):
    """Fitted coupling and resonance with contrast/residual diagnostics."""

    coupling: float
    resonance: float
    contrast: float
    residual: float


def fit_chevron(dataset: ChevronDataset, amplitude_index: int | None = None,
                residual_threshold: float = 0.1) -> ChevronFit:
    """Fit the detuned-oscillation model to one amplitude slice.

    The model is P(t) = C * J^2/(J^2 + d^2/4) * sin^2(sqrt(J^2 + d^2/4) t)
    with d the detuning from the resonance; the fit returns the coupling
    and the frequency of maximal contrast.  A root-mean-square residual
    above ``residual_threshold`` raises FitError with diagnostics.
    """
    if amplitude_index is None:
        if dataset.amplitudes.size != 1:
            raise ValueError("dataset has several amplitudes; pass amplitude_index")
        amplitude_index = 0
    pops = dataset.populations[amplitude_index]
    freqs = dataset.frequencies
    t = dataset.times
    span = t[-1] - t[0]
    if span <= 0:
        raise ValueError("need a nontrivial time window")

    contrast = pops.max(axis=1) - pops.min(axis=1)
    i0 = int(np.argmax(contrast))
    w0 = freqs[i0]
    # first antinode, not argmax: later antinodes alias the rate guess down
    near_top = np.flatnonzero(pops[i0] >= 0.95 * pops[i0].max())
    t_peak = t[int(near_top[0])] if near_top.size else t[-1]
    j0 = math.pi / (2.0 * t_peak) if t_peak > 0 else math.pi / (2.0 * span)
    c0 = min(max(pops[i0].max(), 0.1), 1.0)

    # dimensionless parameters: couplings in 1/span, frequencies near w0
    if freqs.size > 1:
        e_span = (freqs.max() - freqs.min() + 4.0 * j0) * span
    else:
        e_span = 1e-9

    def residuals(p):
        j, e, c = p
        coupling = j / span
        half = 0.5 * (freqs - (w0 + e / span))[:, None]
        rabi2 = coupling * coupling + half * half
        model = c * (coupling * coupling / rabi2) * np.sin(np.sqrt(rabi2) * t[None, :]) ** 2
        return (model - pops).ravel()

    best = None
    for j_start in (j0 * span, 2.0 * j0 * span, 0.5 * j0 * span):
        sol = least_squares(residuals, x0=(j_start, 0.0, c0),
                            bounds=((1e-9, -e_span, 0.0), (50.0 * j_start + 50.0, e_span, 1.2)))
        if best is None or sol.cost < best.cost:
            best = sol
    rms = math.sqrt(np.mean(best.fun ** 2))
    if rms > residual_threshold:
        raise FitError(
            f"chevron fit residual {rms:.4f} above threshold {residual_threshold}; "
            f"guess J={j0:.4g} rad/s at resonance {w0:.6g} rad/s, grid "
            f"{freqs.size} frequencies x {t.size} times")
    j_fit = best.x[0] / span
    return ChevronFit(j_fit, w0 + best.x[1] / span, best.x[2], rms)


def measure_coupling_curve(backend, pair, amplitudes, frequencies, times,
                           neighbor_drives=()) -> tuple:
    """J(A) samples: fit one chevron per amplitude."""
    amps = np.atleast_1d(np.asarray(amplitudes, dtype=float))
    couplings = np.empty(amps.size)
    for i, amp in enumerate(amps):
        data = chevron_scan(backend, pair, [amp], frequencies, times, neighbor_drives)
        couplings[i] = fit_chevron(data).coupling
    return amps, couplings


def amplitude_for_target(j_target: float, curve) -> float:
    """Invert measured J(A) samples for the amplitude hitting a target J."""
    amps, js = (np.asarray(v, dtype=float) for v in curve)
    if amps.size != js.size or amps.size < 2:
        raise ValueError("need matching J(A) samples, at least two points")
    order = np.argsort(amps)
    amps, js = amps[order], js[order]
    diffs = np.diff(js)
    if np.all(diffs > 0):
        pass
    elif np.all(diffs < 0):
        amps, js = amps[::-1], js[::-1]
    else:
        raise ValueError("coupling samples are not monotone in amplitude")
    if not js[0] <= j_target <= js[-1]:
        raise TargetRangeError(
            f"target {j_target:.6g} rad/s outside achievable "
            f"[{js[0]:.6g}, {js[-1]:.6g}] rad/s")
    return float(PchipInterpolator(js, amps)(j_target))


# ---------------------------------------------------------------------------
# closed-loop optimization of simultaneous drives

def _ideal_populations(n: int, tau: float, initial: int, times) -> np.ndarray:
    spec = chains.ChainSpec.pst(n, tau)
    h = chains.single_excitation_hamiltonian(spec)
    w, v = np.linalg.eigh(h)
    amp0 = v.conj().T[:, initial - 1]
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), w))
    return np.abs(phases * amp0 @ v.T) ** 2


def transfer_error_objective(backend, drives: DriveSettings,
                             initial_sites=(1,), times=None) -> float:
    """Mean |population - ideal| over sites, initial states, and times.

    Times default to the five multiples of the backend's transfer time,
    where the ideal trajectory alternates between the mirrored and the
    original configuration.
    """
    tau = backend.tau
    n = backend.n_sites
    if times is None:
        times = np.arange(1, 6) * tau
    times = np.asarray(times, dtype=float)
    total = 0.0
    for s in initial_sites:
        pops = backend.run_chain(drives, s, times)
        ideal = _ideal_populations(n, tau, s, times)
        total += float(np.mean(np.abs(pops - ideal)))
    return total / len(initial_sites)


class ProposalStrategy(Protocol):
    """Propose-evaluate-update contract for pluggable optimizers."""

    def propose(self, rng: np.random.Generator) -> np.ndarray:
        """Next candidate in unit-box coordinates [-1, 1]^dim."""

    def update(self, coords: np.ndarray, value: float) -> None:
        """Report the objective value of an evaluated candidate."""


@dataclass
class ShrinkingGaussianSearch:
    """Random search around the incumbent with decaying Gaussian steps.

    Proposals alternate full-vector moves with single-coordinate
    refinements; the step size decays geometrically to a floor so late
    evaluations polish the best point found.
    """

    dim: int
    sigma: float = 0.35
    floor: float = 0.02
    decay: float = 0.992
    coordinate_fraction: float = 0.4

    def __post_init__(self):
        self._best = np.zeros(self.dim)
        self._best_value = math.inf
        self._step = 0

    def propose(self, rng: np.random.Generator) -> np.ndarray:
        self._step += 1
        scale = max(self.floor, self.sigma * self.decay ** self._step)
        coords = self._best.copy()
        if rng.random() < self.coordinate_fraction:
            k = int(rng.integers(self.dim))
            coords[k] += scale * rng.standard_normal()
        else:
            coords += scale * rng.standard_normal(self.dim)
        return np.clip(coords, -1.0, 1.0)

    def update(self, coords: np.ndarray, value: float) -> None:
        if value < self._best_value:
            self._best_value = value
            self._best = np.asarray(coords, dtype=float).copy()


@dataclass(frozen=True)
class OptimizerConfig:
    """Search box, budget, and termination for the drive optimizer."""

    budget: int = 500
    seed: int = 0
    amplitude_halfwidth: float = 0.35
    frequency_halfwidth: float = TWO_PI * 600e3
    target: float = 0.0
    initial_sites: tuple = (1,)

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if not 0 < self.amplitude_halfwidth < 1:
            raise ValueError("amplitude halfwidth is relative, in (0, 1)")
        if self.frequency_halfwidth <= 0:
            raise ValueError("frequency halfwidth must be positive")


@dataclass(frozen=True)
class CalibrationResult:
    """Best drives found, with the full evaluation history."""

    amplitudes: tuple
    frequencies: tuple
    history: tuple
    best_objective: float
    evaluations: int
    seed: int
    budget_exhausted: bool

    def running_minimum(self) -> list:
        out, best = [], math.inf
        for entry in self.history:
            best = min(best, entry["objective"])
            out.append(best)
        return out

    def as_dict(self) -> dict:
        return {
            "amplitudes": list(self.amplitudes),
            "frequencies": list(self.frequencies),
            "history": [dict(e) for e in self.history],
            "best_objective": self.best_objective,
            "evaluations": self.evaluations,
            "seed": self.seed,
            "budget_exhausted": self.budget_exhausted,
        }


def optimize_simultaneous_drives(backend, guess: DriveSettings,
                                 config: OptimizerConfig | None = None,
                                 strategy: ProposalStrategy | None = None) -> CalibrationResult:
    """Derivative-free minimization of the transfer-error objective.

    The search box is centred on the guess: amplitudes vary by the
    relative halfwidth, frequencies by the absolute one.  Deterministic
    given the config seed; stops at the target objective or when the
    budget is exhausted (flagged on the result).
    """
    config = config or OptimizerConfig()
    m = guess.n_drives
    dim = 2 * m
    rng = np.random.default_rng(config.seed)
    strategy = strategy or ShrinkingGaussianSearch(dim=dim)
    amp0 = np.array(guess.amplitudes)
    freq0 = np.array(guess.frequencies)

    def decode(coords) -> DriveSettings:
        amps = amp0 * (1.0 + coords[:m] * config.amplitude_halfwidth)
        freqs = freq0 + coords[m:] * config.frequency_halfwidth
        return DriveSettings(tuple(amps), tuple(freqs))

    history = []
    best_coords, best_value = None, math.inf

    def evaluate(coords):
        nonlocal best_coords, best_value
        drives = decode(coords)
        value = transfer_error_objective(backend, drives, config.initial_sites)
        history.append({
            "evaluation": len(history) + 1,
            "amplitudes": list(drives.amplitudes),
            "frequencies": list(drives.frequencies),
            "objective": value,
        })
        strategy.update(coords, value)
        if value < best_value:
            best_coords, best_value = coords.copy(), value
        return value

    evaluate(np.zeros(dim))
    while len(history) < config.budget and best_value > config.target:
        evaluate(strategy.propose(rng))

    best = decode(best_coords)
    return CalibrationResult(
        amplitudes=best.amplitudes,
        frequencies=best.frequencies,
        history=tuple(history),
        best_objective=best_value,
        evaluations=len(history),
        seed=config.seed,
        budget_exhausted=len(history) >= config.budget and best_value > config.target,
    )


def write_convergence_csv(result: CalibrationResult, path) -> None:
    """Per-evaluation CSV: objective, running minimum, and parameters."""
    m = len(result.amplitudes)
    running = result.running_minimum()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["evaluation", "objective", "running_min"]
                        + [f"amplitude_{b+1}" for b in range(m)]
                        + [f"frequency_{b+1}" for b in range(m)])
        for entry, run in zip(result.history, running):
            writer.writerow([entry["evaluation"],
                             f"{entry['objective']:.12g}", f"{run:.12g}"]
                            + [f"{a:.12g}" for a in entry["amplitudes"]]
                            + [f"{f:.12g}" for f in entry["frequencies"]])
