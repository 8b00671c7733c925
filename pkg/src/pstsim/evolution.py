"""Time evolution engines and relaxation bookkeeping.

Three propagation methods behind one entry point: dense matrix
exponentials for small problems, Arnoldi/Krylov stepping for larger
excitation sectors, and fixed-step RK4 for explicitly time-dependent
Hamiltonians (flux-driven device models).  Relaxation enters as
non-Hermitian diagonal terms; the survival norm of the propagated state
is tracked alongside per-site populations.
"""

from dataclasses import dataclass, field
from math import pi

import numpy as np
from scipy import sparse
from scipy.linalg import expm

__all__ = [
    "EvolutionOptions",
    "NoiseSpec",
    "Trajectory",
    "propagator",
    "evolve",
    "krylov_expmv",
    "add_relaxation",
    "decay_rates",
    "stroboscopic_compare",
    "DimensionError",
]

DENSE_GUARD = 4096


class DimensionError(RuntimeError):
    """Problem size above the configured dense guard."""


@dataclass
class EvolutionOptions:
    method: str = "dense-expm"          # dense-expm | krylov | rk4
    dt: float | None = None             # rk4 step; None picks the default rule
    krylov_dim: int = 30
    track_norm: bool = True
    dense_guard: int = DENSE_GUARD

    def __post_init__(self):
        if self.method not in ("dense-expm", "krylov", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.krylov_dim < 2:
            raise ValueError("krylov dimension must be at least 2")


@dataclass(frozen=True)
class NoiseSpec:
    """Relaxation times per site, in seconds.

    ``decay_convention`` selects the diagonal rate: ``"t1"`` uses
    -i/(2 T1) per excitation so an isolated excited site's population
    decays as exp(-t/T1); ``"rate-2pi"`` uses -i pi/T1, a 2 pi faster
    population decay kept for compatibility with simulations that quote
    the decay rate as a linear frequency.
    """

    t1: tuple = ()
    decay_convention: str = "t1"

    def __post_init__(self):
        object.__setattr__(self, "t1", tuple(float(t) for t in self.t1))
        if any(t <= 0 for t in self.t1):
            raise ValueError("relaxation times must be positive")
        if self.decay_convention not in ("t1", "rate-2pi"):
            raise ValueError(f"unknown decay convention {self.decay_convention!r}")


def decay_rates(noise: NoiseSpec) -> np.ndarray:
    """Imaginary diagonal rate per site (angular units, per excitation)."""
    t1 = np.array(noise.t1)
    if noise.decay_convention == "t1":
        return 1.0 / (2.0 * t1)
    return pi / t1


def add_relaxation(H, noise: NoiseSpec, occupations: np.ndarray):
    """H minus i times the per-site decay rates weighted by occupation.

    ``occupations`` maps basis states to per-site excitation numbers,
    shape (dim, n_sites); it defines what "excitation at site s" means
    in whatever basis H is expressed.
    """
    occupations = np.asarray(occupations)
    if len(noise.t1) != occupations.shape[1]:
        raise ValueError("one T1 per site required")
    gam = decay_rates(noise)
    diag = occupations @ gam
    if sparse.issparse(H):
        return (H - 1j * sparse.diags(diag.astype(complex))).tocsr()
    return np.asarray(H, dtype=complex) - 1j * np.diag(diag)


def propagator(H, t: float, dense_guard: int = DENSE_GUARD) -> np.ndarray:
    """exp(-i H t) as a dense matrix (scaling-and-squaring Pade)."""
    dim = H.shape[0]
    if dim > dense_guard:
        raise DimensionError(f"dimension {dim} above dense guard {dense_guard}")
    Hd = H.toarray() if sparse.issparse(H) else np.asarray(H, dtype=complex)
    return expm(-1j * Hd * t)


def _default_rk4_dt(H0: np.ndarray, span: float) -> float:
    # resolve the fastest matrix-element frequency; entries are angular
    hmax = np.max(np.abs(H0))
    if hmax == 0:
        return span / 2000 if span > 0 else 1.0
    return min(1.0 / (50.0 * hmax / (2 * pi)), span / 2000)


def _rk4_step(f, t, y, dt):
    k1 = f(t, y)
    k2 = f(t + dt / 2, y + dt / 2 * k1)
    k3 = f(t + dt / 2, y + dt / 2 * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def krylov_expmv(H, v: np.ndarray, t: float, m: int = 30, tol: float = 1e-10) -> np.ndarray:
    """Approximate exp(-i H t) v in an m-dimensional Arnoldi subspace.

    The step is halved recursively while the Hessenberg residual
    estimate exceeds ``tol``.  Works for non-Hermitian H (decay terms).
    """
    beta = np.linalg.norm(v)
    if beta == 0 or t == 0:
        return v.astype(complex)
    dim = H.shape[0]
    m = min(m, dim)
    V = np.zeros((dim, m + 1), dtype=complex)
    h = np.zeros((m + 1, m), dtype=complex)
    V[:, 0] = v / beta
    used = m
    for j in range(m):
        w = H @ V[:, j]
        for i in range(j + 1):
            h[i, j] = np.vdot(V[:, i], w)
            w = w - h[i, j] * V[:, i]
        h[j + 1, j] = np.linalg.norm(w)
        if abs(h[j + 1, j]) < 1e-14:       # happy breakdown: exact in subspace
            used = j + 1
            break
        V[:, j + 1] = w / h[j + 1, j]
    Hm = h[:used, :used]
    small = expm(-1j * Hm * t)
    if used == m and m < dim:
        resid = abs(h[m, m - 1]) * abs(small[m - 1, 0]) * abs(t) * beta
        if resid > tol:
            half = krylov_expmv(H, v, t / 2, m, tol)
            return krylov_expmv(H, half, t / 2, m, tol)
    return beta * (V[:, :used] @ small[:, 0])


@dataclass
class Trajectory:
    """States, per-site populations and survival norm on a time grid."""

    times: np.ndarray
    states: np.ndarray            # (n_times, dim)
    populations: np.ndarray       # (n_times, n_sites)
    norm: np.ndarray

    @property
    def n_sites(self) -> int:
        return self.populations.shape[1]

    def to_csv(self, path):
        cols = ["time_s"] + [f"pop_site_{s + 1}" for s in range(self.n_sites)] + ["norm"]
        with open(path, "w", encoding="ascii", newline="\n") as f:
            f.write(",".join(cols) + "\n")
            for i, t in enumerate(self.times):
                row = [t] + list(self.populations[i]) + [self.norm[i]]
                f.write(",".join("%.12e" % v for v in row) + "\n")

    def as_dict(self, include_states: bool = False) -> dict:
        out = {
            "times_s": [float(t) for t in self.times],
            "populations": [[float(p) for p in row] for row in self.populations],
            "norm": [float(v) for v in self.norm],
        }
        if include_states:
            out["states"] = [
                [[float(a.real), float(a.imag)] for a in row] for row in self.states
            ]
        return out


def evolve(H, psi0: np.ndarray, times, options: EvolutionOptions | None = None,
           occupations: np.ndarray | None = None) -> Trajectory:
    """Propagate ``psi0`` through ``times`` (ascending, seconds).

    ``H`` is a matrix for the static case or a callable ``H(t)`` (rk4
    only).  ``occupations`` (dim, n_sites) converts amplitudes to
    per-site populations; when omitted each basis state is reported as
    its own column.
    """
    options = options or EvolutionOptions()
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a non-empty 1d sequence")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending")
    psi0 = np.asarray(psi0, dtype=complex)
    time_dependent = callable(H)
    if time_dependent and options.method != "rk4":
        raise ValueError("time-dependent H requires the rk4 method")

    states = np.zeros((len(times), len(psi0)), dtype=complex)

    if options.method == "dense-expm":
        if H.shape[0] > options.dense_guard:
            raise DimensionError(
                f"dimension {H.shape[0]} above dense guard {options.dense_guard}")
        Hd = H.toarray() if sparse.issparse(H) else np.asarray(H, dtype=complex)
        psi = psi0
        t_prev = 0.0
        step_cache: dict = {}
        for i, t in enumerate(times):
            dt = t - t_prev
            if dt != 0:
                if dt not in step_cache:
                    step_cache[dt] = expm(-1j * Hd * dt)
                psi = step_cache[dt] @ psi
            states[i] = psi
            t_prev = t
    elif options.method == "krylov":
        psi = psi0
        t_prev = 0.0
        for i, t in enumerate(times):
            dt = t - t_prev
            if dt != 0:
                psi = krylov_expmv(H, psi, dt, m=options.krylov_dim)
            states[i] = psi
            t_prev = t
    else:  # rk4
        Hfun = H if time_dependent else (lambda _t, _H=H: _H)
        H0 = Hfun(float(times[0]))
        H0d = H0.toarray() if sparse.issparse(H0) else np.asarray(H0)
        span = float(times[-1]) - 0.0
        dt = options.dt or _default_rk4_dt(H0d, span if span > 0 else 1.0)

        def f(t, y):
            Ht = Hfun(t)
            return -1j * (Ht @ y)

        psi = psi0
        t_now = 0.0
        for i, t_out in enumerate(times):
            while t_now < t_out - 1e-18:
                step = min(dt, t_out - t_now)
                psi = _rk4_step(f, t_now, psi, step)
                t_now += step
            states[i] = psi
        del f

    if not np.all(np.isfinite(states)):
        raise FloatingPointError("non-finite amplitudes during evolution")

    prob = np.abs(states) ** 2
    norm = np.sqrt(prob.sum(axis=1))
    if occupations is not None:
        populations = prob @ np.asarray(occupations)
    else:
        populations = prob
    return Trajectory(times=times, states=states, populations=populations, norm=norm)


def stroboscopic_compare(U_a: np.ndarray, U_b: np.ndarray):
    """Best global phase aligning two propagators and the residual 2-norm distance.

    Returns ``(phase, distance)`` with distance =
    min_phi || U_a - e^{i phi} U_b ||_2.  The starting guess for phi is
    the argument of the entry ratio at U_b's largest element, refined
    against the trace alignment.
    """
    U_a = np.asarray(U_a)
    U_b = np.asarray(U_b)
    if U_a.shape != U_b.shape:
        raise ValueError("shape mismatch")
    if not np.any(U_a) or not np.any(U_b):
        raise ValueError("zero matrix")
    flat = np.argmax(np.abs(U_b))
    phi0 = float(np.angle(U_a.flat[flat] / U_b.flat[flat]))
    overlap = np.trace(U_b.conj().T @ U_a)
    candidates = [phi0] + ([float(np.angle(overlap))] if overlap != 0 else [])

    def dist(phi):
        return np.linalg.norm(U_a - np.exp(1j * phi) * U_b, 2)

    from scipy.optimize import minimize_scalar

    best_phi, best_d = None, np.inf
    for c in candidates:
        r = minimize_scalar(dist, bracket=(c - 1e-3, c, c + 1e-3))
        if r.fun < best_d:
            best_phi, best_d = float(r.x), float(r.fun)
    # wrap into (-pi, pi]
    best_phi = (best_phi + pi) % (2 * pi) - pi
    if best_phi == -pi:
        best_phi = pi
    return best_phi, best_d
