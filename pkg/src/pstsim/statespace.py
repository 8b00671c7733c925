"""Computational-basis bookkeeping for chains of two-level sites.

Basis states of an ``n``-site chain are integers in ``[0, 2**n)`` whose
binary digits are the site occupations with site 1 as the most
significant bit, i.e. the bitstring reads left to right along the chain.
All chain Hamiltonians here conserve total excitation number, so states
are also addressed inside a fixed-excitation sector through the
combinadic ranking of its occupation patterns in ascending integer
order.
"""

from math import comb

import numpy as np

__all__ = [
    "basis_index",
    "occupations",
    "excitation_number",
    "sector_dimension",
    "sector_states",
    "sector_rank",
    "sector_unrank",
    "occupation_matrix",
    "sector_occupation_matrix",
    "embed_single_qubit",
    "apply_single_qubit",
    "reduced_density_matrix",
    "mirror_site",
    "mirror_index",
]


def basis_index(bits) -> int:
    """Index of the basis state with the given occupation sequence (site 1 first)."""
    x = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"occupations must be 0/1, got {b!r}")
        x = (x << 1) | b
    return x


def occupations(index: int, n: int) -> tuple:
    """Occupation tuple (site 1 first) of basis state ``index``."""
    return tuple((index >> (n - 1 - i)) & 1 for i in range(n))


def excitation_number(index: int) -> int:
    return bin(index).count("1")


def sector_dimension(n: int, k: int) -> int:
    return comb(n, k)


def sector_states(n: int, k: int) -> np.ndarray:
    """All basis indices with ``k`` excitations, ascending."""
    return np.array([x for x in range(2**n) if excitation_number(x) == k], dtype=np.int64)


def sector_rank(index: int, n: int) -> int:
    """Position of ``index`` within its excitation sector (ascending integer order).

    Uses the combinadic: with set-bit positions p_1 > ... > p_k counted
    from the least significant bit, rank = sum_i C(p_i, k+1-i).
    """
    positions = [p for p in range(n - 1, -1, -1) if (index >> p) & 1]
    k = len(positions)
    return sum(comb(p, k - i) for i, p in enumerate(positions))


def sector_unrank(rank: int, n: int, k: int) -> int:
    """Inverse of :func:`sector_rank` for the (n, k) sector."""
    if not 0 <= rank < comb(n, k):
        raise ValueError(f"rank {rank} outside sector of dimension {comb(n, k)}")
    x = 0
    remaining = k
    r = rank
    for p in range(n - 1, -1, -1):
        if remaining == 0:
            break
        c = comb(p, remaining)
        if r >= c:
            x |= 1 << p
            r -= c
            remaining -= 1
    return x


def occupation_matrix(n: int) -> np.ndarray:
    """(2**n, n) matrix of per-site occupations over the full basis."""
    out = np.zeros((2**n, n))
    for x in range(2**n):
        out[x] = occupations(x, n)
    return out


def sector_occupation_matrix(n: int, k: int) -> np.ndarray:
    """(C(n,k), n) occupations over the k-excitation sector basis."""
    states = sector_states(n, k)
    out = np.zeros((len(states), n))
    for r, x in enumerate(states):
        out[r] = occupations(int(x), n)
    return out


def embed_single_qubit(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Dense 2**n operator acting with 2x2 ``op`` on ``site`` (1-based)."""
    if op.shape != (2, 2):
        raise ValueError("op must be 2x2")
    if not 1 <= site <= n:
        raise ValueError(f"site {site} outside chain of length {n}")
    out = np.array([[1.0 + 0j]])
    for s in range(1, n + 1):
        out = np.kron(out, op if s == site else np.eye(2))
    return out


def apply_single_qubit(psi: np.ndarray, op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Apply a 2x2 operator to one site of a full-space state vector."""
    if not 1 <= site <= n:
        raise ValueError(f"site {site} outside chain of length {n}")
    tensor = np.asarray(psi, dtype=complex).reshape((2,) * n)
    axis = site - 1
    tensor = np.tensordot(op, tensor, axes=([1], [axis]))
    # tensordot puts the contracted axis first; move it back into place
    tensor = np.moveaxis(tensor, 0, axis)
    return tensor.reshape(-1)


def reduced_density_matrix(psi: np.ndarray, keep, n: int) -> np.ndarray:
    """Partial trace of |psi><psi| keeping the listed sites (1-based, in order)."""
    keep = list(keep)
    if any(not 1 <= s <= n for s in keep):
        raise ValueError("kept sites outside chain")
    if len(set(keep)) != len(keep):
        raise ValueError("duplicate sites in keep")
    tensor = np.asarray(psi, dtype=complex).reshape((2,) * n)
    kept_axes = [s - 1 for s in keep]
    other_axes = [a for a in range(n) if a not in kept_axes]
    a = np.transpose(tensor, kept_axes + other_axes).reshape(2 ** len(keep), -1)
    # rho_ab = sum_r a[a, r] conj(a[b, r])
    return a @ a.conj().T


def mirror_site(site: int, n: int) -> int:
    """Mirror partner of a site under the chain reflection."""
    if not 1 <= site <= n:
        raise ValueError(f"site {site} outside chain of length {n}")
    return n + 1 - site


def mirror_index(index: int, n: int) -> int:
    """Basis index with the occupation pattern reversed along the chain."""
    out = 0
    for _ in range(n):
        out = (out << 1) | (index & 1)
        index >>= 1
    return out
