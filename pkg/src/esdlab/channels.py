"""Amplitude-damping Kraus channels, local unitaries and staged evolution."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .errors import DimensionError, ParameterError, PhysicalityError
from .states import DensityMatrix

COMPLETENESS_TOL = 1e-10


@dataclass(frozen=True)
class KrausChannel:
    dims: tuple
    ops: tuple = field(repr=False)
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.ops)
        dims = tuple(int(d) for d in self.dims)
        n = int(np.prod(dims))
        for k in ops:
            if k.shape != (n, n):
                raise DimensionError(f"Kraus operator of shape {k.shape} does not match dims {dims}")
            k.setflags(write=False)
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "dims", dims)
        if self.check:
            res = self.completeness_residual()
            if res > COMPLETENESS_TOL:
                raise PhysicalityError(f"Kraus set is not complete (residual {res:.3e})")

    def completeness_residual(self) -> float:
        n = self.ops[0].shape[0]
        s = sum(np.conj(k.T) @ k for k in self.ops)
        return float(np.max(np.abs(s - np.eye(n))))

    def stacked(self) -> np.ndarray:
        return np.stack(self.ops)


@dataclass(frozen=True)
class AdcParams:
    """Decay probability p; a qutrit uses p1 = a*p and p2 = b*p."""
    p: float
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        for name, val in (("p", self.p), ("p1", self.a * self.p), ("p2", self.b * self.p)):
            if not -1e-15 <= val <= 1 + 1e-15:
                raise ParameterError(f"{name}={val} outside [0, 1]")

    def local(self, dim: int) -> KrausChannel:
        if dim == 2:
            return adc_qubit(self.p)
        if dim == 3:
            return adc_qutrit(self.a * self.p, self.b * self.p)
        raise DimensionError(f"no amplitude-damping model for dimension {dim}")

    def channel(self, dims) -> KrausChannel:
        chans = [self.local(d) for d in dims]
        out = chans[0]
        for c in chans[1:]:
            out = pair_channel(out, c)
        return out


def _prob(name: str, p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        if -1e-15 <= p < 0:
            return 0.0
        if 1.0 < p <= 1 + 1e-15:
            return 1.0
        raise ParameterError(f"{name}={p} outside [0, 1]")
    return p


def adc_qubit(p: float) -> KrausChannel:
    p = _prob("p", p)
    m0 = np.diag([1.0, np.sqrt(1 - p)]).astype(complex)
    m1 = np.zeros((2, 2), dtype=complex)
    m1[0, 1] = np.sqrt(p)
    return KrausChannel((2,), (m0, m1))


def adc_qutrit(p1: float, p2: float) -> KrausChannel:
    """V-type qutrit: levels 1 and 2 decay independently to level 0."""
    p1 = _prob("p1", p1)
    p2 = _prob("p2", p2)
    m0 = np.diag([1.0, np.sqrt(1 - p1), np.sqrt(1 - p2)]).astype(complex)
    m1 = np.zeros((3, 3), dtype=complex)
    m1[0, 1] = np.sqrt(p1)
    m2 = np.zeros((3, 3), dtype=complex)
    m2[0, 2] = np.sqrt(p2)
    return KrausChannel((3,), (m0, m1, m2))


def pair_channel(left: KrausChannel, right: KrausChannel) -> KrausChannel:
    ops = tuple(linalg.tensor_product(a, b) for a in left.ops for b in right.ops)
    return KrausChannel(left.dims + right.dims, ops, check=left.check and right.check)


def apply_ops(mat: np.ndarray, ops: np.ndarray) -> np.ndarray:
    """Σ K ρ K† for one state and a stack of Kraus operators.

    ``ops`` may carry leading batch axes ``(..., K, n, n)``; ``mat`` may be
    ``(n, n)`` or batched to match.
    """
    ops = np.asarray(ops)
    if mat.ndim == 2:
        return np.einsum("...kij,jl,...kml->...im", ops, mat, np.conj(ops), optimize=True)
    return np.einsum("...kij,...jl,...kml->...im", ops, mat, np.conj(ops), optimize=True)


def apply(rho: DensityMatrix, ch: KrausChannel) -> DensityMatrix:
    if rho.dims != ch.dims:
        raise DimensionError(f"state dims {rho.dims} do not match channel dims {ch.dims}")
    out = apply_ops(rho.mat, ch.stacked())
    out = 0.5 * (out + np.conj(out.T))
    return DensityMatrix(rho.dims, out)


# ----------------------------------------------------------- unitaries

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_TRIT = {
    "F01": np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=complex),
    "F02": np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]], dtype=complex),
    "F102": np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=complex),
    "F201": np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=complex),
}
_ALIASES = {"SX": "SX", "SIGMAX": "SX", "X": "SX", "NOT": "SX", "I": "I", "ID": "I",
            "IDENTITY": "I", "I2": "I", "I3": "I"}
UNITARY_NAMES = ("SX", "I", "F01", "F02", "F102", "F201")


def canonical_unitary_name(name: str) -> str:
    key = name.strip().replace("σ", "SIGMA").upper().replace("_", "")
    key = _ALIASES.get(key, key)
    if key not in UNITARY_NAMES:
        raise ParameterError(f"unknown local unitary {name!r}")
    return key


def local_unitary(name: str, dim: int) -> np.ndarray:
    key = canonical_unitary_name(name)
    if key == "I":
        return np.eye(dim, dtype=complex)
    if key == "SX":
        if dim != 2:
            raise ParameterError("σx acts on a qubit")
        return _SX.copy()
    if dim != 3:
        raise ParameterError(f"{key} acts on a qutrit")
    return _TRIT[key].copy()


def apply_local(rho: DensityMatrix, u1: np.ndarray, u2: np.ndarray) -> DensityMatrix:
    u = linalg.tensor_product(u1, u2)
    if u.shape[0] != rho.dim:
        raise DimensionError("local unitaries do not match the state dimension")
    return DensityMatrix(rho.dims, u @ rho.mat @ np.conj(u.T))


def staged_evolution(
    rho0: DensityMatrix,
    stage1: AdcParams | KrausChannel,
    luo: tuple | None,
    stage2: AdcParams | KrausChannel,
) -> DensityMatrix:
    """Damp, optionally apply U1⊗U2, then damp again."""
    c1 = stage1.channel(rho0.dims) if isinstance(stage1, AdcParams) else stage1
    c2 = stage2.channel(rho0.dims) if isinstance(stage2, AdcParams) else stage2
    rho = apply(rho0, c1)
    if luo is not None:
        rho = apply_local(rho, *luo)
    return apply(rho, c2)


# ------------------------------------------------ single-shot composites

def composite_adc_kraus(p: float, pp: float, swapped: bool = False) -> KrausChannel:
    """Three-operator single-qubit set for two damping stages in a row.

    The third operator carries amplitude sqrt((1-p) p'), the amplitude of
    the second-stage decay path. ``swapped=True`` returns the variant with
    sqrt((1-p') p) in that slot, which is not trace preserving.
    """
    p, pp = _prob("p", p), _prob("p'", pp)
    k1 = np.diag([1.0, np.sqrt((1 - p) * (1 - pp))]).astype(complex)
    k2 = np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)
    amp = np.sqrt((1 - pp) * p) if swapped else np.sqrt((1 - p) * pp)
    k3 = np.array([[0, amp], [0, 0]], dtype=complex)
    return KrausChannel((2,), (k1, k2, k3), check=not swapped)


def not_mid_kraus(p: float, pp: float, swapped: bool = False) -> KrausChannel:
    """Four-operator set for damping p, then σx, then damping p'.

    The swap operator has sqrt(1-p) above and sqrt(1-p') below the diagonal;
    ``swapped=True`` puts sqrt(1-p) in both slots (not trace preserving).
    """
    p, pp = _prob("p", p), _prob("p'", pp)
    k1 = np.array([[np.sqrt(pp), 0], [0, 0]], dtype=complex)
    lower = np.sqrt(1 - p) if swapped else np.sqrt(1 - pp)
    k2 = np.array([[0, np.sqrt(1 - p)], [lower, 0]], dtype=complex)
    k3 = np.array([[0, 0], [0, np.sqrt(p * (1 - pp))]], dtype=complex)
    k4 = np.array([[0, np.sqrt(p * pp)], [0, 0]], dtype=complex)
    return KrausChannel((2,), (k1, k2, k3, k4), check=not swapped)


# ----------------------------------------------------------- converters

def p_from_decay(rate: float, t: float) -> float:
    """Atomic decay: p = 1 - exp(-Γt)."""
    return float(1.0 - np.exp(-rate * t))


def p_from_hwp(theta_deg: float) -> float:
    """Half-wave-plate damping setting: p = sin²(2θ)."""
    return float(np.sin(2 * np.deg2rad(theta_deg)) ** 2)


# ------------------------------------------------- parameter families

ChannelFamily = Callable[[float], KrausChannel]


def _local_batch(dim: int, ps: np.ndarray, a: float, b: float) -> np.ndarray:
    """Damping Kraus stacks of one subsystem for every p: (B, K, d, d)."""
    ps = np.clip(ps, 0.0, 1.0)
    n = ps.size
    if dim == 2:
        out = np.zeros((n, 2, 2, 2), dtype=complex)
        out[:, 0, 0, 0] = 1.0
        out[:, 0, 1, 1] = np.sqrt(1 - ps)
        out[:, 1, 0, 1] = np.sqrt(ps)
        return out
    if dim == 3:
        p1, p2 = a * ps, b * ps
        out = np.zeros((n, 3, 3, 3), dtype=complex)
        out[:, 0, 0, 0] = 1.0
        out[:, 0, 1, 1] = np.sqrt(1 - p1)
        out[:, 0, 2, 2] = np.sqrt(1 - p2)
        out[:, 1, 0, 1] = np.sqrt(p1)
        out[:, 2, 0, 2] = np.sqrt(p2)
        return out
    raise DimensionError(f"no amplitude-damping model for dimension {dim}")


def family_for(dims: Sequence[int], a: float = 1.0, b: float = 1.0) -> ChannelFamily:
    """Map p to the local damping channel on every subsystem of ``dims``."""
    dims = tuple(dims)

    def build(p: float) -> KrausChannel:
        return AdcParams(p, a, b).channel(dims)

    def batch(ps) -> np.ndarray:
        ps = np.asarray(ps, dtype=float)
        for d in dims:
            top = max(a, b) if d == 3 else 1.0
            if ps.size and (ps.min() < -1e-15 or top * ps.max() > 1 + 1e-15):
                raise ParameterError("damping probability outside [0, 1]")
        out = _local_batch(dims[0], ps, a, b)
        for d in dims[1:]:
            nxt = _local_batch(d, ps, a, b)
            bn, ka, da = out.shape[:3]
            kb, db = nxt.shape[1], nxt.shape[2]
            out = np.einsum("xaij,xbkl->xabikjl", out, nxt).reshape(bn, ka * kb, da * db, da * db)
        return out

    build.dims = dims
    build.batch = batch
    return build


def family_ops(family: ChannelFamily, ps) -> np.ndarray:
    """Stack Kraus operators for each p: shape (len(ps), K, n, n)."""
    if hasattr(family, "batch"):
        return family.batch(ps)
    return np.stack([family(float(p)).stacked() for p in ps])
