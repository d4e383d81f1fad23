"""Entanglement, purity and fidelity measures."""

from __future__ import annotations

import numpy as np

from . import linalg
from .errors import DimensionError, PhysicalityError
from .states import DensityMatrix, SchmidtState

_SYSY = np.kron(linalg.pauli(2), linalg.pauli(2))


def _bipartite(rho: DensityMatrix) -> tuple:
    if len(rho.dims) != 2:
        raise DimensionError("measure needs a bipartite state")
    return rho.dims


def pt_min_eigenvalue(rho: DensityMatrix) -> float:
    """Smallest eigenvalue of the partial transpose; negative means entangled."""
    pt = linalg.partial_transpose(rho.mat, _bipartite(rho), "B")
    return float(linalg.hermitian_eigenvalues(pt)[0])


def negativity(rho: DensityMatrix) -> float:
    pt = linalg.partial_transpose(rho.mat, _bipartite(rho), "B")
    w = linalg.hermitian_eigenvalues(pt)
    return float(-np.sum(w[w < 0]))


def log_negativity(rho: DensityMatrix) -> float:
    return float(np.log2(2 * negativity(rho) + 1))


def concurrence_2q(rho: DensityMatrix) -> float:
    if rho.dims != (2, 2):
        raise DimensionError("Wootters concurrence needs two qubits")
    m = rho.mat
    # ρ(σy⊗σy)ρ*(σy⊗σy) shares its spectrum with the Hermitian √ρ ρ~ √ρ
    s = linalg.psd_sqrt(m)
    h = s @ _SYSY @ np.conj(m) @ _SYSY @ s
    lam = np.clip(linalg.hermitian_eigenvalues(h), 0.0, None)[::-1]
    root = np.sqrt(lam)
    return float(max(0.0, root[0] - root[1] - root[2] - root[3]))


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def eof_from_concurrence(c: float) -> float:
    c = min(max(c, 0.0), 1.0)
    return binary_entropy((1 + np.sqrt(1 - c * c)) / 2)


def eof_2q(rho: DensityMatrix) -> float:
    return eof_from_concurrence(concurrence_2q(rho))


def tangle(rho: DensityMatrix) -> float:
    return concurrence_2q(rho) ** 2


def purity(rho: DensityMatrix) -> float:
    return rho.purity()


def von_neumann_entropy(mat) -> float:
    w = linalg.hermitian_eigenvalues(mat)
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log2(w)))


def entanglement_entropy(rho: DensityMatrix) -> float:
    """Entropy of the reduced state; defined for pure bipartite input."""
    _bipartite(rho)
    if rho.purity() < 1 - 1e-8:
        raise PhysicalityError("entanglement entropy needs a pure state")
    return von_neumann_entropy(linalg.partial_trace(rho.mat, rho.dims, "B"))


def linear_entropy(rho: DensityMatrix) -> float:
    d = rho.dim
    return float(d / (d - 1) * (1 - rho.purity()))


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Tr sqrt( sqrt(ρ) σ sqrt(ρ) )."""
    if rho.dims != sigma.dims:
        raise DimensionError("fidelity needs states of equal dimension")
    s = linalg.psd_sqrt(rho.mat)
    inner = s @ sigma.mat @ s
    w = np.clip(linalg.hermitian_eigenvalues(inner), 0.0, None)
    return float(min(1.0, np.sum(np.sqrt(w))))


def realigned_trace_norm(rho: DensityMatrix) -> float:
    return linalg.trace_norm(linalg.realign(rho.mat, _bipartite(rho)))


def realigned_negativity(rho: DensityMatrix) -> float:
    return max(0.0, realigned_trace_norm(rho) - 1.0)


# ------------------------------------------------------- pure-state forms

def qutrit_pure_measures(s: SchmidtState) -> dict:
    c = np.asarray(s.coeffs, dtype=float)
    if c.size != 3:
        raise DimensionError("qutrit measures need three Schmidt coefficients")
    sq = c * c
    nz = sq[sq > 0]
    e = float(-np.sum(nz * np.log2(nz)))
    n = float(c[0] * c[1] + c[1] * c[2] + c[2] * c[0])
    pairs = sq[0] * sq[1] + sq[1] * sq[2] + sq[2] * sq[0]
    gc = float(np.sqrt(3 * pairs))
    return {"E": e, "N": n, "C": gc, "I": gc * gc}


def tripartite_measures(kind: str, coeffs) -> dict:
    c = np.asarray(coeffs, dtype=float)
    if abs(np.sum(c * c) - 1) > 1e-12:
        raise PhysicalityError("coefficients are not normalized")
    sq = c * c
    if kind.upper().startswith("GHZ"):
        if c.size != 2:
            raise DimensionError("GHZ-type states have two coefficients")
        t = float(4 * sq[0] * sq[1])
        return {"tangle": t, "G": t}
    if kind.upper().startswith("W"):
        if c.size != 3:
            raise DimensionError("W-type states have three coefficients")
        g = 8.0 / 3.0 * (sq[0] * sq[1] + sq[1] * sq[2] + sq[2] * sq[0])
        return {"tangle": 0.0, "G": float(g)}
    raise ValueError("kind must be 'GHZ' or 'W'")
