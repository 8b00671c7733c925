"""Chain-transfer experiments: PST/FST runs, parity phases, GHZ generation.

Each experiment is a pure function of its inputs.  States are full
2^n vectors (site 1 = most significant bit) unless a function documents
a sector-based fast path.
"""

from dataclasses import dataclass, field
from math import pi
import cmath

import numpy as np
from scipy.linalg import expm

from . import evolution, statespace
from .models import chains, lattice

__all__ = [
    "GateOp",
    "GraphStateReport",
    "ParityExperimentResult",
    "GHZScenario",
    "GHZReport",
    "wrap_phase",
    "apply_gate",
    "simulate_gates",
    "run_pst",
    "run_fst",
    "parity_phase_experiment",
    "parity_phase_table",
    "double_fst_parity_experiment",
    "ghz_circuit",
    "run_ghz",
    "paper_ghz_scenario",
    "graph_state_edges",
    "lattice_pst",
]

INPUT_PHASES = {"+x": 0.0, "+y": pi / 2, "-x": pi, "-y": -pi / 2}

NOISE_MODELS = ("ideal", "zz", "relax", "zz+relax")


def wrap_phase(x: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    out = (x + pi) % (2 * pi) - pi
    return pi if out == -pi else out


# ---------------------------------------------------------------------------
# gates

_SQ = 1.0 / np.sqrt(2.0)
_H = np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex)
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def _rx(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class GateOp:
    """One circuit element.

    ``kind`` is one of Hadamard, X90, Y90, Zphi, Xpi, PST, FST.  For
    X90/Y90 ``param`` overrides the rotation angle (default +pi/2); for
    Zphi it is the phase, for FST the transfer angle theta.  PST and FST
    always act on the whole register and take ``targets=()``.
    """

    kind: str
    targets: tuple = ()
    param: float | None = None

    def __post_init__(self):
        if self.kind not in ("Hadamard", "X90", "Y90", "Zphi", "Xpi", "PST", "FST"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind in ("PST", "FST") and self.targets:
            raise ValueError(f"{self.kind} acts on the whole chain; targets must be empty")
        if self.kind == "Zphi" and self.param is None:
            raise ValueError("Zphi needs a phase parameter")
        if self.kind == "FST" and self.param is None:
            raise ValueError("FST needs a transfer angle parameter")


def _single_qubit_matrix(gate: GateOp) -> np.ndarray:
    if gate.kind == "Hadamard":
        return _H
    if gate.kind == "X90":
        return _rx(pi / 2 if gate.param is None else gate.param)
    if gate.kind == "Y90":
        return _ry(pi / 2 if gate.param is None else gate.param)
    if gate.kind == "Zphi":
        return np.array([[1.0, 0.0], [0.0, cmath.exp(1j * gate.param)]])
    if gate.kind == "Xpi":
        return _X
    raise ValueError(f"{gate.kind} is not a single-qubit gate")


def apply_gate(state: np.ndarray, gate: GateOp, n_sites: int | None = None) -> np.ndarray:
    """Apply one gate to a full-register state vector."""
    state = np.asarray(state, dtype=complex)
    n = n_sites if n_sites is not None else int(round(np.log2(state.size)))
    if state.size != 2**n:
        raise ValueError("state dimension is not 2^n")
    if gate.kind == "PST":
        targets, phases = chains.pst_state_map(n)
        out = np.empty_like(state)
        out[targets] = phases * state
        return out
    if gate.kind == "FST":
        # tau cancels against the 1/tau coupling scale
        return chains.fst_effective_propagator(n, 1.0, gate.param) @ state
    if not gate.targets:
        raise ValueError(f"{gate.kind} needs explicit target sites")
    u = _single_qubit_matrix(gate)
    for site in gate.targets:
        if not 1 <= site <= n:
            raise ValueError(f"target site {site} outside 1..{n}")
        state = statespace.apply_single_qubit(state, u, site, n)
    return state


def simulate_gates(n: int, gates, initial=None) -> np.ndarray:
    """Run a gate list on |0...0> (or the given state) and return the state."""
    if initial is None:
        state = np.zeros(2**n, dtype=complex)
        state[0] = 1.0
    else:
        state = np.asarray(initial, dtype=complex).copy()
    for g in gates:
        state = apply_gate(state, g, n)
    return state


# ---------------------------------------------------------------------------
# transfer runs

def _noise_for(model: str, spec: chains.ChainSpec, noise):
    if model not in NOISE_MODELS:
        raise ValueError(f"model must be one of {NOISE_MODELS}")
    if "relax" in model and noise is None:
        raise ValueError("relax model needs a NoiseSpec")
    use_noise = noise if "relax" in model else None
    use_zz = spec.zz if (model.startswith("zz") and spec.zz) else ()
    if model.startswith("zz") and not spec.zz:
        raise ValueError("zz model but the chain spec carries no zz couplings")
    return use_noise, use_zz


def run_pst(spec: chains.ChainSpec, initial, times, noise=None,
            model: str = "ideal") -> evolution.Trajectory:
    """Evolve the chain and record per-site populations.

    ``initial`` is either a 1-based site index (single-excitation fast
    path in the n-dimensional sector) or a full 2^n state vector.
    ``model`` selects the noise terms: "ideal", "zz" (uses the spec's zz
    couplings), "relax" (needs ``noise``), or "zz+relax".
    """
    n = spec.n_sites
    use_noise, use_zz = _noise_for(model, spec, noise)
    eff_spec = spec if use_zz else chains.ChainSpec(
        couplings=spec.couplings, tau=spec.tau, detunings=spec.detunings,
        zz=(), label=spec.label)
    if isinstance(initial, (int, np.integer)):
        if not 1 <= initial <= n:
            raise ValueError(f"start site {initial} outside 1..{n}")
        H = chains.single_excitation_hamiltonian(eff_spec).astype(complex)
        if use_noise is not None:
            rates = evolution.decay_rates(use_noise)
            H = H - 1j * np.diag(rates)
        psi0 = np.zeros(n, dtype=complex)
        psi0[initial - 1] = 1.0
        return evolution.evolve(H, psi0, times)
    psi0 = np.asarray(initial, dtype=complex)
    if psi0.size != 2**n:
        raise ValueError("initial state dimension does not match the chain")
    H = chains.chain_hamiltonian(eff_spec)
    occ = statespace.occupation_matrix(n)
    if use_noise is not None:
        H = evolution.add_relaxation(H, use_noise, occ)
    return evolution.evolve(H, psi0, times, occupations=occ)


def run_fst(spec: chains.ChainSpec, initial, times, noise=None,
            model: str = "ideal") -> evolution.Trajectory:
    """Same as run_pst for a fractional-transfer chain spec."""
    return run_pst(spec, initial, times, noise=noise, model=model)


# ---------------------------------------------------------------------------
# parity experiment

@dataclass(frozen=True)
class ParityExperimentResult:
    inner: str
    input_state: str
    phase: float
    parity: int

    def as_dict(self) -> dict:
        return {"inner": self.inner, "input_state": self.input_state,
                "phase_rad": self.phase, "parity": self.parity}


def _sector_transfer_vector(spec, occupied_sites, noise):
    """Evolve a computational chain state for time tau within its sector."""
    n = spec.n_sites
    k = len(occupied_sites)
    bits = 0
    for s in occupied_sites:
        bits |= 1 << (n - s)
    states = statespace.sector_states(n, k)
    H = chains.sector_hamiltonian(spec, k).astype(complex)
    if noise is not None:
        rates = evolution.decay_rates(noise)
        occ = statespace.sector_occupation_matrix(n, k)
        H = H - 1j * np.diag(occ @ rates)
    psi = np.zeros(len(states), dtype=complex)
    try:
        psi[statespace.sector_rank(bits, n)] = 1.0
    except (ValueError, IndexError) as exc:
        raise RuntimeError("inner excitations outside the evolved sector") from exc
    return states, expm(-1j * H * spec.tau) @ psi


def parity_phase_experiment(n: int, inner: str, input_state: str,
                            model: str = "ideal", zeta=(), noise=None,
                            tau: float | None = None) -> ParityExperimentResult:
    """Transfer-phase measurement for one inner bitstring and input state.

    Site 1 is prepared in the +-x/+-y superposition, sites 2..n-1 in the
    computational ``inner`` pattern, site n in the ground state.  After
    one transfer the x-y angle of site n's reduced state is read out and
    the prepared input phase subtracted; the result is wrapped to
    (-pi, pi].  ``zeta`` (rad/s per adjacent pair) activates ZZ terms
    during the transfer for the "zz" models.
    """
    if n < 3:
        raise ValueError("parity experiment needs n >= 3")
    if len(inner) != n - 2 or set(inner) - {"0", "1"}:
        raise ValueError(f"inner must be a bitstring of length {n - 2}")
    if input_state not in INPUT_PHASES:
        raise ValueError(f"input_state must be one of {sorted(INPUT_PHASES)}")
    tau = 640e-9 if tau is None else tau
    spec = chains.ChainSpec.pst(n, tau)
    if model.startswith("zz"):
        if not zeta:
            raise ValueError("zz model needs zeta values")
        spec = spec.with_zz(tuple(zeta))
    use_noise, _ = _noise_for(model, spec, noise)

    inner_sites = [i + 2 for i, b in enumerate(inner) if b == "1"]
    low = _sector_transfer_vector(spec, inner_sites, use_noise)
    high = _sector_transfer_vector(spec, [1] + inner_sites, use_noise)

    phi_in = INPUT_PHASES[input_state]
    full = np.zeros(2**n, dtype=complex)
    states_lo, amp_lo = low
    states_hi, amp_hi = high
    full[states_lo] = amp_lo / np.sqrt(2.0)
    full[states_hi] += np.exp(1j * phi_in) * amp_hi / np.sqrt(2.0)

    rho = statespace.reduced_density_matrix(full, [n], n)
    coher = 2.0 * rho[1, 0]                      # <X> + i<Y>
    if abs(coher) < 1e-9:
        raise RuntimeError("transferred state has no x-y coherence; phase undefined")
    phi_out = cmath.phase(coher)
    parity = -1 if len(inner_sites) % 2 else 1
    return ParityExperimentResult(inner=inner, input_state=input_state,
                                  phase=wrap_phase(phi_in - phi_out), parity=parity)


def parity_phase_table(n: int, input_states=("+x",), model: str = "ideal",
                       zeta=(), noise=None, tau: float | None = None):
    """All 2^(n-2) inner bitstrings for the given input states."""
    results = []
    for code in range(2 ** (n - 2)):
        inner = format(code, f"0{n - 2}b")
        for inp in input_states:
            results.append(parity_phase_experiment(
                n, inner, inp, model=model, zeta=zeta, noise=noise, tau=tau))
    return results


# ---------------------------------------------------------------------------
# double FST parity experiment

def double_fst_parity_experiment(middle_excited_first_leg: bool,
                                 theta: float = pi / 2,
                                 tau: float = 350e-9) -> np.ndarray:
    """Two theta=pi/2 fractional transfers on three sites.

    The outer excitation starts on site 1.  With the middle qubit in the
    ground state for both legs the two half-transfers compose and the
    excitation arrives at site 3.  Starting the middle excited and
    flipping it between the legs reverses the second rotation, so the
    excitation refocuses on site 1.  Returns per-site populations.
    """
    spec = chains.ChainSpec.fst(3, tau, theta)
    H = chains.chain_hamiltonian(spec)
    U = expm(-1j * H.toarray() * tau)
    state = np.zeros(8, dtype=complex)
    bits = 0b100 | (0b010 if middle_excited_first_leg else 0)
    state[bits] = 1.0
    state = U @ state
    if middle_excited_first_leg:
        state = apply_gate(state, GateOp("Xpi", (2,)), 3)
    state = U @ state
    occ = statespace.occupation_matrix(3)
    return (np.abs(state) ** 2) @ occ


# ---------------------------------------------------------------------------
# GHZ circuit

def ghz_circuit(n: int):
    """Gate list turning |0...0> into the n-qubit GHZ state.

    Hadamards everywhere, one transfer, then a local rotation layer that
    depends on n mod 4.  For odd n the final layer is X90 on every site;
    for even n every site gets Y90 except site 1, whose axis is fixed up
    with a Z(+-pi/2) before an X(+-90).
    """
    if n < 2:
        raise ValueError("GHZ circuit needs n >= 2")
    ops = [GateOp("Hadamard", tuple(range(1, n + 1)))]
    ops.append(GateOp("PST"))
    rest = tuple(range(2, n + 1))
    if n % 2 == 1:
        ops.append(GateOp("X90", tuple(range(1, n + 1))))
    elif n % 4 == 0:
        ops.append(GateOp("Zphi", (1,), -pi / 2))
        ops.append(GateOp("X90", (1,)))
        ops.append(GateOp("Y90", rest))
    else:
        ops.append(GateOp("Zphi", (1,), pi / 2))
        ops.append(GateOp("X90", (1,), -pi / 2))
        ops.append(GateOp("Y90", rest))
    return ops


def ghz_state(n: int) -> np.ndarray:
    out = np.zeros(2**n, dtype=complex)
    out[0] = out[-1] = 1.0 / np.sqrt(2.0)
    return out


# ---------------------------------------------------------------------------
# noisy GHZ scenario

@dataclass(frozen=True)
class GHZScenario:
    """Concrete noise configuration for a GHZ-generation run.

    ``t1`` lists relaxation times per chain site; ``zeta`` lists residual
    ZZ strengths (rad/s) per adjacent pair.  ``zz_application`` places
    the ZZ phase either during the transfer window ("transfer") or as
    the accumulated conditional phase at the end of the sequence
    ("end").  ``decay_convention`` selects the non-Hermitian rate
    normalization (see evolution.NoiseSpec).
    """

    n: int = 3
    tau: float = 216e-9
    t1: tuple = ()
    zeta: tuple = ()
    decay_convention: str = "t1"
    zz_application: str = "end"
    label: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two sites")
        if self.t1 and len(self.t1) != self.n:
            raise ValueError("need one T1 per site")
        if self.zeta and len(self.zeta) != self.n - 1:
            raise ValueError("need one zeta per adjacent pair")
        if self.zz_application not in ("transfer", "end"):
            raise ValueError("zz_application must be 'transfer' or 'end'")

    def noise(self):
        if not self.t1:
            return None
        return evolution.NoiseSpec(t1=self.t1, decay_convention=self.decay_convention)


def paper_ghz_scenario() -> GHZScenario:
    """Three-qubit GHZ scenario with the published relaxation times.

    The chain maps onto device qubits (q5, q6, q1); the ZZ strengths are
    set so the accumulated conditional phase on |111> over the sequence
    is 0.378 rad.
    """
    zeta = -0.378 / (2 * 216e-9)
    return GHZScenario(n=3, tau=216e-9, t1=(63.4e-6, 72.0e-6, 12.1e-6),
                       zeta=(zeta, zeta), decay_convention="rate-2pi",
                       zz_application="end", label="ghz-n3-published")


@dataclass(frozen=True)
class GHZReport:
    fidelity: float
    fidelity_opt: float
    phi_opt: float
    norm: float
    state: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        return {"fidelity": self.fidelity, "fidelity_opt": self.fidelity_opt,
                "phi_opt_rad": self.phi_opt, "norm": self.norm}


def run_ghz(scenario: GHZScenario) -> GHZReport:
    """Simulate the GHZ sequence under the scenario's noise terms.

    Relaxation enters as a non-Hermitian term during the transfer; the
    surviving (no-jump) amplitude is compared against the GHZ target
    without renormalization, so population leak counts as infidelity.
    ``fidelity_opt`` maximizes over a virtual Z rotation of site 1.
    """
    n = scenario.n
    spec = chains.ChainSpec.pst(n, scenario.tau)
    if scenario.zeta and scenario.zz_application == "transfer":
        spec = spec.with_zz(scenario.zeta)
    state = simulate_gates(n, [GateOp("Hadamard", tuple(range(1, n + 1)))])
    H = chains.chain_hamiltonian(spec)
    occ = statespace.occupation_matrix(n)
    noise = scenario.noise()
    if noise is not None:
        H = evolution.add_relaxation(H, noise, occ)
    U = expm(-1j * (H.toarray() if hasattr(H, "toarray") else H) * scenario.tau)
    state = U @ state
    for g in ghz_circuit(n)[2:]:
        state = apply_gate(state, g, n)
    if scenario.zeta and scenario.zz_application == "end":
        pair_term = np.zeros(2**n)
        for k, z in enumerate(scenario.zeta, start=1):
            pair_term += z * occ[:, k - 1] * occ[:, k]
        state = np.exp(-1j * pair_term * scenario.tau) * state
    a0 = state[0]
    a1 = state[-1]
    fid = 0.5 * abs(a0 + a1) ** 2
    fid_opt = 0.5 * (abs(a0) + abs(a1)) ** 2
    phi_opt = wrap_phase(cmath.phase(a0) - cmath.phase(a1)) if abs(a0) * abs(a1) > 0 else 0.0
    return GHZReport(fidelity=fid, fidelity_opt=fid_opt, phi_opt=phi_opt,
                     norm=float(np.linalg.norm(state) ** 2), state=state)


# ---------------------------------------------------------------------------
# graph-state bookkeeping

@dataclass(frozen=True)
class GraphStateReport:
    n: int
    iswap_edges: tuple
    cz_edges: tuple
    edge_transfer_index: dict = field(repr=False)

    def union(self):
        return set(self.iswap_edges) | set(self.cz_edges)


def graph_state_edges(n: int) -> GraphStateReport:
    """Two-qubit interactions generated by one transfer on n sites.

    Each mirror pair (m, n+1-m) contributes an iSWAP edge; every site k
    strictly between a pair contributes CZ edges (m, k) and (n+1-m, k).
    Together these form the complete graph K_n.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    iswap = []
    cz = []
    origin = {}
    for m in range(1, n // 2 + 1):
        mt = n + 1 - m
        iswap.append((m, mt))
        origin[(m, mt)] = m
        for k in range(m + 1, mt):
            for edge in ((m, k), (k, mt)):
                e = tuple(sorted(edge))
                cz.append(e)
                origin[e] = m
    return GraphStateReport(n=n, iswap_edges=tuple(iswap), cz_edges=tuple(cz),
                            edge_transfer_index=origin)


# ---------------------------------------------------------------------------
# lattices

def lattice_pst(spec: lattice.LatticeSpec, start, times) -> evolution.Trajectory:
    """Single-excitation lattice transfer; populations indexed x-major."""
    H = lattice.build_lattice_hamiltonian(spec)
    psi0 = np.zeros(spec.n_sites, dtype=complex)
    psi0[lattice.site_index(spec, *start)] = 1.0
    return evolution.evolve(H, psi0, times)
