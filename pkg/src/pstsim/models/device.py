"""Transmon ring with flux-tunable couplers and parametric drives.

Six fixed-frequency qubits sit on a loop, every adjacent pair bridged by
a flux-tunable coupler.  Each mode is a Duffing oscillator truncated to
a few levels; qubit-coupler (and weak residual qubit-qubit) couplings
take the flux-flux form (g/2)(a+ - a)(b+ - b).  Modulating a coupler's
flux at the difference frequency of its two qubits activates an
effective exchange between them whose strength follows, to first order,
the derivative of the coupler frequency at the bias point.

Spec data (frequencies, couplings) is stored in Hz as it would appear on
a datasheet; every Hamiltonian builder returns angular-frequency units.
"""

from dataclasses import dataclass, field
from math import pi

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "QubitSpec",
    "CouplerSpec",
    "DeviceSpec",
    "DriveConfig",
    "ResourceError",
    "coupler_frequency",
    "flux_asymmetry",
    "coupler_flux_derivative",
    "effective_coupling_estimate",
    "DeviceSubsetModel",
    "build_device_hamiltonian",
    "crosstalk_compensation",
    "default_device",
]

DIMENSION_GUARD = 4096


class ResourceError(RuntimeError):
    """Model dimension above the configured guard."""


@dataclass(frozen=True)
class QubitSpec:
    frequency_hz: float
    anharmonicity_hz: float
    t1_s: float


@dataclass(frozen=True)
class CouplerSpec:
    """Tunable coupler: frequency range, anharmonicity and neighbour couplings.

    ``g_left_hz`` couples to the lower-indexed qubit of the pair the
    coupler bridges, ``g_right_hz`` to the higher-indexed one (ring
    wrap: the last coupler bridges the last and first qubits).
    ``phi_dc`` is the default flux operating point in flux quanta.
    """

    omega_min_hz: float
    omega_max_hz: float
    anharmonicity_hz: float
    g_left_hz: float
    g_right_hz: float
    phi_dc: float = 0.0


@dataclass(frozen=True)
class DeviceSpec:
    """Ring of qubits and couplers; coupler j bridges qubits j and j+1 (wrapping)."""

    qubits: tuple
    couplers: tuple
    qubit_qubit_g_hz: tuple = ()   # residual static coupling per pair, None where unknown
    levels: int = 3
    label: str = ""

    def __post_init__(self):
        n = len(self.qubits)
        if len(self.couplers) != n:
            raise ValueError("ring layout needs one coupler per qubit")
        gqq = tuple(self.qubit_qubit_g_hz) or (None,) * n
        if len(gqq) != n:
            raise ValueError("need one qubit-qubit g per adjacent pair")
        object.__setattr__(self, "qubit_qubit_g_hz", gqq)
        if self.levels < 2:
            raise ValueError("at least two levels per mode")

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def coupler_qubits(self, j: int):
        """Indices (1-based) of the two qubits bridged by coupler j."""
        n = self.n_qubits
        return j, j % n + 1


@dataclass(frozen=True)
class DriveConfig:
    """Flux modulation of one coupler: phi(t) = phi_dc + A cos(w t + phase)."""

    coupler: int
    amplitude: float            # flux quanta
    frequency_hz: float
    phase: float = 0.0
    harmonic: int = 1
    phi_dc: float | None = None  # overrides the coupler's default bias

    def __post_init__(self):
        if self.harmonic < 1:
            raise ValueError("harmonic must be >= 1")


def flux_asymmetry(coupler: CouplerSpec) -> float:
    """SQUID junction asymmetry d reproducing the coupler's frequency range."""
    ec = -coupler.anharmonicity_hz
    return ((coupler.omega_min_hz + ec) / (coupler.omega_max_hz + ec)) ** 2


def coupler_frequency(coupler: CouplerSpec, phi) -> np.ndarray:
    """Coupler frequency (Hz) at flux ``phi`` (flux quanta).

    Asymmetric-SQUID transmon dispersion
    w(phi) = (w_max + E_C) [d^2 + (1 - d^2) cos^2(pi phi)]^{1/4} - E_C
    with E_C = -anharmonicity and d fixed by w(0.5) = w_min.
    """
    ec = -coupler.anharmonicity_hz
    d = flux_asymmetry(coupler)
    c2 = np.cos(pi * np.asarray(phi, dtype=float)) ** 2
    return (coupler.omega_max_hz + ec) * (d * d + (1 - d * d) * c2) ** 0.25 - ec


_STENCIL_STEP = 1e-3

_STENCILS = {
    1: ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)),
    2: ((-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)),
}
_STENCIL_NORM = {1: 12.0 * _STENCIL_STEP, 2: 12.0 * _STENCIL_STEP**2}


def coupler_flux_derivative(coupler: CouplerSpec, phi: float, order: int = 1) -> float:
    """d^k w_c / d phi^k (Hz per flux-quantum^k), 5-point central stencil."""
    if order not in _STENCILS:
        raise ValueError("only first and second flux derivatives are supported")
    acc = 0.0
    for offset, w in _STENCILS[order]:
        acc += w * coupler_frequency(coupler, phi + offset * _STENCIL_STEP)
    return acc / _STENCIL_NORM[order]


def effective_coupling_estimate(device: DeviceSpec, pair, drive: DriveConfig) -> float:
    """First-order estimate of the parametric coupling J (angular frequency).

    J ~ (d^k w_c/d phi^k)|_dc * g g' / Delta^2 * A^k / 2 with Delta the
    difference frequency of the driven pair and k the drive harmonic.
    Valid near the calibrated bias points; tests cross-check it against
    full-model chevron dynamics.
    """
    a, b = pair
    j = drive.coupler
    qa, qb = device.coupler_qubits(j)
    if {a, b} != {qa, qb}:
        raise ValueError(f"pair {pair} is not bridged by coupler {j}")
    cp = device.couplers[j - 1]
    delta = 2 * pi * (device.qubits[qa - 1].frequency_hz - device.qubits[qb - 1].frequency_hz)
    if delta == 0:
        raise ZeroDivisionError("degenerate pair: difference frequency is zero")
    phi_dc = cp.phi_dc if drive.phi_dc is None else drive.phi_dc
    k = drive.harmonic
    deriv = 2 * pi * coupler_flux_derivative(cp, phi_dc, order=k)
    g1 = 2 * pi * cp.g_left_hz
    g2 = 2 * pi * cp.g_right_hz
    return deriv * g1 * g2 / delta**2 * drive.amplitude**k / 2.0


def _mode_ops(levels: int):
    a = np.diag(np.sqrt(np.arange(1, levels)), 1)
    n = np.diag(np.arange(levels, dtype=float))
    return a, n


class DeviceSubsetModel:
    """Hamiltonian of a subset of qubits and couplers with flux drives.

    Splits H(t) = H_fixed + sum_j w_cj(phi_j(t)) N_j so time stepping
    only re-evaluates the coupler frequencies.  Modes are ordered as the
    given qubits followed by the given couplers, each with ``levels``
    states.
    """

    def __init__(self, device: DeviceSpec, qubit_indices, coupler_indices,
                 drives=(), levels: int | None = None,
                 guard: int = DIMENSION_GUARD, allow_large: bool = False):
        self.device = device
        self.qubits = tuple(qubit_indices)
        self.couplers = tuple(coupler_indices)
        self.levels = levels or device.levels
        n_modes = len(self.qubits) + len(self.couplers)
        self.dim = self.levels**n_modes
        if self.dim > guard and not allow_large:
            raise ResourceError(
                f"{self.dim} basis states above guard {guard}; pass allow_large to override")
        drives = tuple(drives)
        for d in drives:
            if d.coupler not in self.couplers:
                raise ValueError(f"drive on coupler {d.coupler} outside the subset")
        self.drives = drives
        self._build()

    def _mode_index(self, kind: str, idx: int) -> int:
        if kind == "q":
            return self.qubits.index(idx)
        return len(self.qubits) + self.couplers.index(idx)

    def _embed(self, op: np.ndarray, mode: int) -> np.ndarray:
        n_modes = len(self.qubits) + len(self.couplers)
        out = np.array([[1.0 + 0j]])
        for m in range(n_modes):
            out = np.kron(out, op if m == mode else np.eye(self.levels))
        return out

    def _build(self):
        dev = self.device
        a, nop = _mode_ops(self.levels)
        duff = 0.5 * (nop @ nop - nop)           # a+ a+ a a / 2 on the diagonal
        H = np.zeros((self.dim, self.dim), dtype=complex)
        for qi in self.qubits:
            q = dev.qubits[qi - 1]
            H += 2 * pi * q.frequency_hz * self._embed(nop, self._mode_index("q", qi))
            H += 2 * pi * q.anharmonicity_hz * self._embed(duff, self._mode_index("q", qi))
        self._coupler_n = {}
        for cj in self.couplers:
            c = dev.couplers[cj - 1]
            m = self._mode_index("c", cj)
            # the w_c(t) a+a part stays out of H_fixed; anharmonicity is static
            H += 2 * pi * c.anharmonicity_hz * self._embed(duff, m)
            self._coupler_n[cj] = np.diag(self._embed(nop, m)).real.copy()
            qa, qb = dev.coupler_qubits(cj)
            for qi, g in ((qa, c.g_left_hz), (qb, c.g_right_hz)):
                if qi in self.qubits:
                    da = self._embed(a - a.T, self._mode_index("q", qi))   # (a - a+), real
                    dc = self._embed(a - a.T, m)
                    H += 2 * pi * g / 2 * (da @ dc)
        n_q = dev.n_qubits
        for p in range(1, n_q + 1):
            g = dev.qubit_qubit_g_hz[p - 1]
            qa, qb = p, p % n_q + 1
            if g is None or qa not in self.qubits or qb not in self.qubits:
                continue
            da = self._embed(a - a.T, self._mode_index("q", qa))
            db = self._embed(a - a.T, self._mode_index("q", qb))
            H += 2 * pi * g / 2 * (da @ db)
        self.H_fixed = H

    def flux(self, cj: int, t) -> np.ndarray:
        """Flux on coupler ``cj`` at time(s) t, bias plus all its drives."""
        c = self.device.couplers[cj - 1]
        phi = None
        acc = 0.0
        for d in self.drives:
            if d.coupler == cj:
                if d.phi_dc is not None:
                    phi = d.phi_dc
                acc = acc + d.amplitude * np.cos(2 * pi * d.frequency_hz * np.asarray(t) + d.phase)
        if phi is None:
            phi = c.phi_dc
        return phi + acc

    def hamiltonian(self, t: float) -> np.ndarray:
        """Dense H(t) in angular-frequency units (Hermitian)."""
        H = self.H_fixed.copy()
        for cj in self.couplers:
            w = coupler_frequency(self.device.couplers[cj - 1], self.flux(cj, t))
            H += np.diag(2 * pi * w * self._coupler_n[cj])
        return H

    def occupations(self) -> np.ndarray:
        """(dim, n_modes) excitation numbers, qubit modes first."""
        n_modes = len(self.qubits) + len(self.couplers)
        out = np.zeros((self.dim, n_modes))
        a, nop = _mode_ops(self.levels)
        for m in range(n_modes):
            out[:, m] = np.diag(self._embed(nop, m)).real
        return out

    def bare_index(self, occupation: dict) -> int:
        """Basis index for a product state, e.g. {("q", 1): 1} for one excitation."""
        digits = []
        for qi in self.qubits:
            digits.append(occupation.get(("q", qi), 0))
        for cj in self.couplers:
            digits.append(occupation.get(("c", cj), 0))
        idx = 0
        for d in digits:
            if not 0 <= d < self.levels:
                raise ValueError("occupation outside the level truncation")
            idx = idx * self.levels + d
        return idx

    def evolve_columns(self, psi0: np.ndarray, times: np.ndarray,
                       frequencies_hz: np.ndarray, base_drive: DriveConfig,
                       dt: float | None = None) -> np.ndarray:
        """RK4-propagate one initial state under copies of ``base_drive``
        at several drive frequencies simultaneously.

        Only the frequency varies across columns, so each step reuses the
        fixed part and adjusts the driven coupler's diagonal per column.
        Returns |amplitudes|^2 with shape (len(times), dim, n_freqs).
        """
        if any(d.coupler == base_drive.coupler for d in self.drives):
            raise ValueError("base drive coupler must not also carry a static drive")
        cj = base_drive.coupler
        c = self.device.couplers[cj - 1]
        phi_dc = base_drive.phi_dc if base_drive.phi_dc is not None else c.phi_dc
        ncol = len(frequencies_hz)
        w_ang = 2 * pi * np.asarray(frequencies_hz)

        others = [j for j in self.couplers if j != cj]

        def hpsi(t, psi):
            out = self.H_fixed @ psi
            for oj in others:
                w = coupler_frequency(self.device.couplers[oj - 1], self.flux(oj, t))
                out += (2 * pi * w) * (self._coupler_n[oj][:, None] * psi)
            phi_cols = phi_dc + base_drive.amplitude * np.cos(w_ang * t + base_drive.phase)
            w_cols = coupler_frequency(c, phi_cols)
            out += self._coupler_n[cj][:, None] * (psi * (2 * pi * w_cols)[None, :])
            return out

        def f(t, psi):
            return -1j * hpsi(t, psi)

        times = np.asarray(times, dtype=float)
        if dt is None:
            hmax = np.max(np.abs(self.hamiltonian(0.0)))
            dt = 1.0 / (50.0 * hmax / (2 * pi))
        psi = np.tile(np.asarray(psi0, dtype=complex)[:, None], (1, ncol))
        out = np.zeros((len(times), self.dim, ncol))
        t_now = 0.0
        for i, t_out in enumerate(times):
            while t_now < t_out - 1e-18:
                step = min(dt, t_out - t_now)
                k1 = f(t_now, psi)
                k2 = f(t_now + step / 2, psi + step / 2 * k1)
                k3 = f(t_now + step / 2, psi + step / 2 * k2)
                k4 = f(t_now + step, psi + step * k3)
                psi = psi + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                t_now += step
            out[i] = np.abs(psi) ** 2
        return out


def build_device_hamiltonian(device: DeviceSpec, qubit_indices, coupler_indices,
                             drives=(), t: float = 0.0, levels: int | None = None,
                             guard: int = DIMENSION_GUARD,
                             allow_large: bool = False) -> np.ndarray:
    """Dense H(t)/hbar for a device subset (angular frequency)."""
    model = DeviceSubsetModel(device, qubit_indices, coupler_indices, drives,
                              levels=levels, guard=guard, allow_large=allow_large)
    return model.hamiltonian(t)


def crosstalk_compensation(M: np.ndarray, phi_target, phi_off,
                           cond_threshold: float = 1e8) -> np.ndarray:
    """Voltages solving M V + phi_off = phi_target for the flux lines."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("M must be square")
    if np.linalg.cond(M) > cond_threshold:
        raise np.linalg.LinAlgError("flux crosstalk matrix is ill conditioned")
    rhs = np.asarray(phi_target, dtype=float) - np.asarray(phi_off, dtype=float)
    return np.linalg.solve(M, rhs)


def operating_point(coupler: CouplerSpec, omega_target_hz: float) -> float:
    """Flux (in [0, 0.5]) at which the coupler sits at ``omega_target_hz``."""
    lo, hi = coupler.omega_min_hz, coupler.omega_max_hz
    if not lo <= omega_target_hz <= hi:
        raise ValueError(f"target {omega_target_hz} outside range [{lo}, {hi}]")
    return brentq(lambda p: coupler_frequency(coupler, p) - omega_target_hz, 0.0, 0.5,
                  xtol=1e-12)


# Default device: measured datasheet values where published; anharmonicities
# and flux operating points are artifact defaults (see package notes).
_QUBIT_FREQ_GHZ = (4.370, 3.930, 4.272, 4.220, 3.830, 3.210)
_QUBIT_T1_US = (12.1, 53.2, 26.2, 46.0, 63.4, 72.0)
_COUPLER_RANGE_GHZ = (
    (3.65, 7.17), (4.92, 7.51), (3.38, 7.28), (4.66, 6.75), (2.57, 4.71), (3.95, 6.93),
)
_G_NEXT_MHZ = (62.0, 74.0, 68.0, 60.0, 47.0, 77.0)   # qubit j  <-> coupler j
_G_PREV_MHZ = (65.0, 59.0, 112.0, 65.0, 61.0, 64.0)  # qubit j  <-> coupler j-1
_G_QQ_MHZ = (None, 6.0, 8.3, 6.6, 4.8, None)         # pair (j, j+1), ring
_QUBIT_ANHARM_MHZ = -250.0
_COUPLER_ANHARM_MHZ = -200.0

# Coupler bias frequencies (GHz) for the default operating points.  c1 and c5
# sit exactly midway between their two qubits: there the static mediated
# coupling cancels (decoupling point) and the first-order amplitude-to-coupling
# estimate, which divides by the qubit difference frequency squared, agrees
# with full-model chevron dynamics at small drive amplitude.  For c2, c4 and
# c6 the midpoint lies outside the tuning range, and for c3 it would sit on
# top of the near-degenerate qubit pair, so those fall back to a dispersive
# bias on the slope (g/detuning <= 0.3 for both neighbours, at least 100 MHz
# from either qubit).
_COUPLER_BIAS_GHZ = (4.1500, 5.4380, 4.5500, 5.0780, 3.5200, 4.8440)


def default_device() -> DeviceSpec:
    """Six-qubit ring with the published datasheet parameters."""
    qubits = tuple(
        QubitSpec(frequency_hz=f * 1e9, anharmonicity_hz=_QUBIT_ANHARM_MHZ * 1e6,
                  t1_s=t1 * 1e-6)
        for f, t1 in zip(_QUBIT_FREQ_GHZ, _QUBIT_T1_US)
    )
    couplers = []
    for j in range(6):
        lo, hi = _COUPLER_RANGE_GHZ[j]
        cp = CouplerSpec(
            omega_min_hz=lo * 1e9, omega_max_hz=hi * 1e9,
            anharmonicity_hz=_COUPLER_ANHARM_MHZ * 1e6,
            g_left_hz=_G_NEXT_MHZ[j] * 1e6,
            g_right_hz=_G_PREV_MHZ[(j + 1) % 6] * 1e6,
        )
        phi = operating_point(cp, _COUPLER_BIAS_GHZ[j] * 1e9)
        couplers.append(CouplerSpec(**{**cp.__dict__, "phi_dc": phi}))
    gqq = tuple(None if g is None else g * 1e6 for g in _G_QQ_MHZ)
    return DeviceSpec(qubits=qubits, couplers=tuple(couplers),
                      qubit_qubit_g_hz=gqq, levels=3, label="default-ring")
