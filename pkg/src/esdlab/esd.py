"""Sudden-death thresholds, their manipulation by local unitaries, and a
numerical finder used as an independent check on every closed form.

Conventions
-----------
* ``p`` (or ``p_n``) is the damping accumulated before a local unitary is
  applied; ``p'`` is the damping after it.
* For two-qubit X states the closed forms report the end of entanglement on
  the compound scale, ``1 - p_end = (1 - p_n)(1 - p')``.
* An end point of exactly 1.0 means no sudden death (asymptotic decay).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import channels, linalg
from .errors import ConvergenceError, ParameterError
from .states import DensityMatrix

ENTANGLED_TOL = 1e-14
BISECT_TOL = 1e-10
MAX_BISECT = 60
AVOIDED = 1.0

AVOID, DELAY, HASTEN, EQUAL = "A", "D", "H", "="


# ===================================================== X-state closed forms

def _x_from_u(u: float) -> float:
    x = 1.0 - u
    if x <= 0:
        raise ParameterError("x = 1 - u must be positive")
    return x


def esd_p0_x(u: float, v: float, p: float = 0.0) -> float:
    """Second-stage damping p' at which an X state loses entanglement, given
    first-stage damping p and no intervention. May fall outside [0, 1]."""
    x = _x_from_u(u)
    v = abs(v)
    return (v - x * p) / (x * (1 - p))


def p_end_x(u: float, v: float) -> float:
    """End of entanglement on the compound scale: |v| / x."""
    return abs(v) / _x_from_u(u)


@dataclass(frozen=True)
class Boundaries:
    p0: float
    pA: float
    pB: float

    @property
    def pA_physical(self) -> bool:
        return 0.0 < self.pA < self.p0

    @property
    def pB_physical(self) -> bool:
        return 0.0 < self.pB < self.p0


def boundaries_double_not(u: float, v: float) -> Boundaries:
    """NOT on both qubits: hasten/delay boundary pA and delay/avoid boundary pB."""
    x = _x_from_u(u)
    v = abs(v)
    p_a = (1 - 2 * u) / (2 * x)
    p_b = (v - u) / (1 + v - u)
    return Boundaries(p_end_x(u, v), p_a, p_b)


def boundaries_single_not(u: float, v: float) -> Boundaries:
    """NOT on one qubit."""
    _x_from_u(u)
    v = abs(v)
    p_a = v / (u + 2 * v) if (u + 2 * v) != 0 else np.inf
    p_b = v * v / (v * v - u + 1)
    return Boundaries(p_end_x(u, v), p_a, p_b)


def p_end_after_double_raw(p_n: float, u: float, v: float) -> float:
    x = _x_from_u(u)
    v = abs(v)
    num = p_n ** 2 * (2 * x + v) + p_n * (1 - 2 * x - 2 * v) + v
    den = x * (p_n ** 2 - 1) + 1
    return num / den if den != 0 else np.inf


def p_end_after_single_raw(p_n: float, u: float, v: float) -> float:
    x = _x_from_u(u)
    v = abs(v)
    if p_n == 0:
        return np.inf
    rad = 4 * x * (p_n - 1) * p_n + 4 * (p_n - 1) ** 2 * v * v + 1
    return (np.sqrt(max(rad, 0.0)) + 2 * x * p_n - 1) / (2 * x * p_n)


def _clamp_end(val: float) -> float:
    if not np.isfinite(val) or val >= 1.0:
        return AVOIDED
    return float(val)


def p_end_after_double(p_n: float, u: float, v: float) -> float:
    """End of entanglement after a NOT on both qubits at p_n (1.0 = avoided)."""
    return _clamp_end(p_end_after_double_raw(p_n, u, v))


def p_end_after_single(p_n: float, u: float, v: float) -> float:
    """End of entanglement after a NOT on one qubit at p_n (1.0 = avoided)."""
    return _clamp_end(p_end_after_single_raw(p_n, u, v))


# ================================================== general X states

@dataclass(frozen=True)
class GeneralThresholds:
    p0: float
    pA_double: float
    pB_double: float
    pA_single: float
    pB_single: float

    def physical(self, name: str) -> bool:
        val = getattr(self, name)
        if name == "p0":
            return 0.0 < val <= 1.0
        return 0.0 < val < self.p0


def general_x_thresholds(form: str, a: float, b: float, c: float, d: float, z: float) -> GeneralThresholds:
    """Closed forms for the outer-corner (``rho2``) and inner-block (``rho1``)
    X-state families, in the excited-first labelling where ``a`` is the
    doubly excited population. Parameters are not checked for positivity."""
    if abs(a + b + c + d - 1) > 1e-12:
        raise ParameterError("a + b + c + d must equal 1")
    z2 = abs(z) ** 2
    f = form.lower()
    if f == "rho2":
        root = np.sqrt((b - c) ** 2 + 4 * z2)
        p0 = (-b - c + root) / (2 * a)
        pa_d = (a - d) / (1 + a - d)
        pb_d = 1 - (2 * a + b + c - root) / (2 * ((a + b) * (a + c) - z2))
        pa_s = 1 - (c + a) * ((c + a) * (1 - p0) - 1) / ((a + b) * ((a + b) - root) - a)
        pb_s = (z2 - c) / (z2 + a)
    elif f == "rho1":
        root = np.sqrt((b + c + 2 * a) ** 2 - 4 * (a - z2))
        p0 = (-b - c + root) / (2 * a)
        pa_d = (a - d) / (1 + a - d)
        pb_d = (2 * (a - z2) - (2 * a + b + c) + root) / (2 * (a - z2))
        pa_s = ((c + a) * (2 * a * (1 - p0) - (c + a) * (1 - p0) + c + d) - a) / (
            (c + a) * (2 * a * (1 - p0) - (b + a)) - a
        )
        pb_s = 1 - (a + c) / ((a + b) * (a + c) + z2)
    else:
        raise ParameterError("form must be 'rho1' or 'rho2'")
    return GeneralThresholds(float(p0), float(pa_d), float(pb_d), float(pa_s), float(pb_s))


# ================================================= numerical ESD finder

def _min_pt_eig(mats: np.ndarray, dims) -> np.ndarray:
    pt = linalg.partial_transpose(mats, dims, "B")
    return linalg.hermitian_eigenvalues(pt)[..., 0]


def _filtered(evolved: np.ndarray, ops: np.ndarray) -> np.ndarray:
    """Undo the no-jump operator K0 (diagonal, product form) and renormalise.

    An invertible local filter leaves NPT status unchanged, while near p -> 1
    it lifts populations and coherences of order (1 - p) back to order one,
    so the sign test is not swamped by round-off.
    """
    k0 = ops[..., 0, :, :]
    diag = np.diagonal(k0, axis1=-2, axis2=-1)
    if np.any(np.abs(k0 - diag[..., :, None] * np.eye(k0.shape[-1])) > 0) or np.any(np.abs(diag) < 1e-12):
        return evolved
    f = 1.0 / diag
    if evolved.ndim == 4:                       # (G, B, n, n) against (G, n)
        f = f[:, None, :]
    out = f[..., :, None] * evolved * np.conj(f)[..., None, :]
    tr = np.real(np.trace(out, axis1=-2, axis2=-1))
    return out / tr[..., None, None]


def _scan_grid() -> np.ndarray:
    body = np.linspace(0.0, 1.0, 101)[:-1]
    tail = 1.0 - np.logspace(-2.5, -6.0, 8)
    return np.concatenate([body, tail])


def _esd_batch(mats: np.ndarray, dims, family: channels.ChannelFamily) -> np.ndarray:
    """First damping value at which each state in the stack stops being NPT."""
    mats = np.asarray(mats, dtype=complex)
    nb = mats.shape[0]
    grid = _scan_grid()
    ops = channels.family_ops(family, grid)                     # (G, K, n, n)
    evolved = np.einsum("gkij,bjl,gkml->gbim", ops, mats, np.conj(ops), optimize=True)
    ent = _min_pt_eig(_filtered(evolved, ops), dims) < -ENTANGLED_TOL   # (G, B)

    out = np.full(nb, AVOIDED)
    dead = ~ent
    first_dead = np.where(dead.any(axis=0), np.argmax(dead, axis=0), -1)
    out[first_dead == 0] = 0.0
    todo = np.where(first_dead > 0)[0]
    if todo.size == 0:
        return out
    lo = grid[first_dead[todo] - 1].copy()
    hi = grid[first_dead[todo]].copy()
    sub = mats[todo]
    for _ in range(MAX_BISECT):
        if np.all(hi - lo < BISECT_TOL):
            break
        mid = 0.5 * (lo + hi)
        mops = channels.family_ops(family, mid)                 # (B, K, n, n)
        ev = np.einsum("bkij,bjl,bkml->bim", mops, sub, np.conj(mops), optimize=True)
        alive = _min_pt_eig(_filtered(ev, mops), dims) < -ENTANGLED_TOL
        lo = np.where(alive, mid, lo)
        hi = np.where(alive, hi, mid)
    else:
        raise ConvergenceError("ESD bisection did not converge")
    out[todo] = hi
    return out


def _prepare(rho0: DensityMatrix, family, luo, p_ns) -> np.ndarray:
    """States just after the intervention, one per p_n (stacked)."""
    if p_ns is None:
        mats = rho0.mat[None, :, :]
    else:
        ops = channels.family_ops(family, p_ns)
        mats = channels.apply_ops(rho0.mat, ops)
    if luo is not None:
        u = linalg.tensor_product(*luo) if isinstance(luo, tuple) else np.asarray(luo)
        mats = u @ mats @ np.conj(u.T)
    return mats


def numeric_esd_points(rho0: DensityMatrix, family, luo=None, p_ns=None) -> np.ndarray:
    """Vectorised :func:`numeric_esd_point` over a sequence of p_n."""
    ps = None if p_ns is None else np.atleast_1d(np.asarray(p_ns, dtype=float))
    return _esd_batch(_prepare(rho0, family, luo, ps), rho0.dims, family)


def numeric_esd_point(rho0: DensityMatrix, family, luo=None, p_n: Optional[float] = None) -> float:
    """Damping at which the partial transpose first becomes positive.

    With ``p_n`` given, the state is first damped by ``p_n``, then ``luo``
    (a pair of local unitaries) is applied, and the returned value is the
    second-stage damping. Returns 1.0 if entanglement survives to p -> 1.
    """
    ps = None if p_n is None else [p_n]
    return float(numeric_esd_points(rho0, family, luo, ps)[0])


# ==================================================== regime reports

@dataclass
class RegimeReport:
    p0: float
    pA: Optional[float] = None
    pB: Optional[float] = None
    p_end_curve: list = field(default_factory=list)     # (p_n, p_end, regime)
    regimes: list = field(default_factory=list)         # (regime, lo, hi)
    boundaries: list = field(default_factory=list)      # sorted boundary p_n values
    extras: dict = field(default_factory=dict)

    @property
    def regime_set(self) -> str:
        seen = {r for r, _, _ in self.regimes}
        return "".join(k for k in (AVOID, DELAY, HASTEN) if k in seen)


def classify_regime(p_n: float, report: RegimeReport) -> str:
    """Avoid / Delay / Hasten from the closed-form boundaries of a report."""
    if p_n >= report.p0:
        raise ParameterError(f"p_n={p_n} is not before the sudden-death point {report.p0}")
    if report.pB is not None and report.pB > 0 and p_n <= report.pB:
        return AVOID
    if report.pA is not None and report.pA < report.p0 and p_n > report.pA:
        return HASTEN
    return DELAY


def _intervals(grid: np.ndarray, labels: Sequence[str], edges: Sequence[float], p0: float) -> list:
    runs = []
    start = 0.0
    cur = labels[0]
    bi = 0
    for k in range(1, len(labels)):
        if labels[k] != cur:
            runs.append((cur, start, edges[bi]))
            start = edges[bi]
            bi += 1
            cur = labels[k]
    runs.append((cur, start, p0))
    return [(str(r), float(lo), float(hi)) for r, lo, hi in runs if r != EQUAL]


def x_state_report(u: float, v: float, mode: str, grid: int = 400) -> RegimeReport:
    """Closed-form regime report for a NOT on one or both qubits."""
    mode = mode.lower()
    if mode in ("double", "double-not"):
        bnd, end = boundaries_double_not(u, v), p_end_after_double
    elif mode in ("single", "single-not"):
        bnd, end = boundaries_single_not(u, v), p_end_after_single
    else:
        raise ParameterError("mode must be 'single-not' or 'double-not'")
    if abs(v) == 0:
        raise ParameterError("state is separable (|v| = 0): nothing to manipulate")
    p0 = bnd.p0
    if not 0 < p0 <= 1:
        raise ParameterError(f"no sudden death in (0, 1]: p0 = {p0:.6g}")
    rep = RegimeReport(p0=p0, pA=bnd.pA if bnd.pA_physical else None,
                       pB=bnd.pB if bnd.pB > 0 else None)
    rep.extras.update(pA_raw=bnd.pA, pB_raw=bnd.pB, mode=mode)
    pts = np.linspace(0.0, p0, grid, endpoint=False)
    labels = []
    raw_rep = RegimeReport(p0=p0, pA=bnd.pA, pB=bnd.pB)
    for pn in pts:
        lab = classify_regime(pn, raw_rep)
        labels.append(lab)
        rep.p_end_curve.append((float(pn), end(pn, u, v), lab))
    edges = sorted(e for e in (bnd.pB, bnd.pA) if 0 < e < p0)
    rep.boundaries = edges
    rep.regimes = _intervals(pts, labels, edges + [p0, p0], p0)
    return rep


# ------------------------------------------- numeric regimes (any family)

def _classify_numeric(rho0, family, luo, pns) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pns = np.asarray(pns, dtype=float)
    manip = numeric_esd_points(rho0, family, luo, pns)
    plain = numeric_esd_points(rho0, family, None, pns)
    labels = np.where(
        manip >= AVOIDED, AVOID,
        np.where(manip > plain + 1e-9, DELAY, np.where(manip < plain - 1e-9, HASTEN, EQUAL)),
    )
    return labels, manip, plain


def _refine(rho0, family, luo, lo, hi, lab_lo, lab_hi, tol=1e-8, split=8) -> float:
    while hi - lo > tol:
        pts = np.linspace(lo, hi, split + 2)[1:-1]
        labs, _, _ = _classify_numeric(rho0, family, luo, pts)
        nxt = None
        prev_p, prev_l = lo, lab_lo
        for p, l in zip(pts, labs):
            if l != prev_l:
                nxt = (prev_p, p, prev_l, l)
                break
            prev_p, prev_l = p, l
        if nxt is None:
            nxt = (prev_p, hi, prev_l, lab_hi)
        lo, hi, lab_lo, lab_hi = nxt
    return 0.5 * (lo + hi)


def _bridge_equal(labels: list) -> list:
    """An EQUAL run sitting between two different regimes marks the edge itself
    (a grid point landed on the crossing); hand it to the following regime."""
    out = list(labels)
    k = 0
    while k < len(out):
        if out[k] != EQUAL:
            k += 1
            continue
        j = k
        while j + 1 < len(out) and out[j + 1] == EQUAL:
            j += 1
        if 0 < k and j + 1 < len(out) and out[k - 1] != out[j + 1]:
            out[k:j + 1] = [out[j + 1]] * (j + 1 - k)
        k = j + 1
    return out


def numeric_regime_report(
    rho0: DensityMatrix,
    family: channels.ChannelFamily,
    luo,
    grid: int = 120,
    p0: Optional[float] = None,
    refine: bool = True,
) -> RegimeReport:
    """Classify every p_n in [0, p0) by comparing the manipulated end of
    entanglement with the uninterrupted one, and locate the boundaries."""
    if p0 is None:
        p0 = numeric_esd_point(rho0, family)
    if p0 >= AVOIDED or p0 <= 0:
        raise ParameterError(f"state shows no sudden death (end point {p0:.6g})")
    pts = np.linspace(0.0, p0, grid, endpoint=False)
    labels, manip, _ = _classify_numeric(rho0, family, luo, pts)
    raw = list(labels)
    labels = _bridge_equal(raw)
    edges, cuts = [], []
    for k in range(1, len(pts)):
        if labels[k] != labels[k - 1]:
            if EQUAL in (labels[k], labels[k - 1]):
                # isolated coincidences (e.g. p_n = 0 for a symmetric LUO) are not regime edges
                cuts.append(float(pts[k - 1] if labels[k - 1] == EQUAL else pts[k]))
                continue
            if refine:
                e = _refine(rho0, family, luo, pts[k - 1], pts[k], labels[k - 1], labels[k])
            else:
                e = 0.5 * (pts[k - 1] + pts[k])
            edges.append(e)
            cuts.append(e)
    rep = RegimeReport(p0=float(p0))
    rep.p_end_curve = [(float(p), float(m), str(l)) for p, m, l in zip(pts, manip, raw)]
    rep.regimes = _intervals(pts, list(labels), cuts + [p0], p0)
    rep.boundaries = [float(e) for e in edges]
    for reg, lo, hi in rep.regimes:
        if reg == AVOID:
            rep.pB = float(hi)
        if reg == HASTEN and rep.pA is None:
            rep.pA = float(lo)
    return rep


# ============================================ qubit-qutrit closed forms

def qq3_negativity_surface(x: float, p: float) -> float:
    """Signed smallest partial-transpose eigenvalue for the one-parameter
    qubit-qutrit family with coherence between |02> and |10>, damped by p
    (qutrit rates 0.8p and 0.6p). Negative means entangled."""
    rad = (0.64 * p ** 4 * x ** 2 - 1.28 * p ** 3 * x ** 2 + 10.24 * p ** 2 * x ** 2
           + 2.56 * p ** 3 * x - 12.16 * p ** 2 * x + 4.96 * p ** 2 - 25.6 * p * x ** 2
           + 25.6 * p * x - 6.4 * p + 16 * x ** 2 - 16 * x + 4)
    return 0.25 * (2 * p ** 2 * x - 4 * p * x + 1.6 * p + 2 * x - np.sqrt(rad))


def qq3_negativity_staged(x: float, p: float, pp: float) -> float:
    """Two-stage version of :func:`qq3_negativity_surface`; closed form exists for x = 0.25 only."""
    if abs(x - 0.25) > 1e-12:
        raise ParameterError("the two-stage closed form is tabulated for x = 0.25 only")
    q = pp
    lin = (0.34 * p ** 2 * q ** 2 - 0.84 * p ** 2 * q - 0.84 * p * q ** 2 + 0.5 * p * q
           + 0.5 * q ** 2 + 0.6 * q + 0.5 * p ** 2 + 0.6 * p + 0.5)
    rad = (0.0256 * p ** 4 * q ** 4 - 0.1152 * p ** 4 * q ** 3 + 0.1936 * p ** 4 * q ** 2
           - 0.144 * p ** 4 * q - 0.1152 * p ** 3 * q ** 4 + 0.0096 * p ** 3 * q ** 3
           + 0.8656 * p ** 3 * q ** 2 - 1.32 * p ** 3 * q + 0.1936 * p ** 2 * q ** 4
           + 0.8656 * p ** 2 * q ** 3 - 0.9676 * p ** 2 * q ** 2 - 2.584 * p ** 2 * q
           - 0.144 * p * q ** 4 - 1.32 * p * q ** 3 - 2.584 * p * q ** 2 + 6.48 * p * q
           + 0.04 * q ** 4 + 0.56 * q ** 3 + 2.56 * q ** 2 - 1.6 * q
           + 0.04 * p ** 4 + 0.56 * p ** 3 + 2.56 * p ** 2 - 1.6 * p + 1)
    return 0.25 * (lin - np.sqrt(rad))


def state_I_uninterrupted_end(p: float) -> float:
    """x = 0.25: second-stage damping that ends entanglement without intervention."""
    qa = 0.0625 * p ** 2 - 0.15 * p + 0.0875
    qb = 0.15 * p ** 2 + 0.035 * p - 0.25
    qc = 0.0875 * p ** 2 + 0.25 * p - 0.1875
    return (qb + np.sqrt(qb * qb - 4 * qa * qc)) / (2 * qa)


def state_I_sx_f01_end(p_n: float) -> float:
    """x = 0.25: end point after σx ⊗ F01 at p_n (values >= 1 mean avoided)."""
    return ((p_n - 1) * (0.0875 * p_n ** 2 + 0.25 * p_n - 0.1875)
            / ((0.25 * p_n + 0.5) * (0.35 * p_n ** 2 + p_n + 0.25)))


QUBIT_QUTRIT_RATES = (0.8, 0.6)


def qubit_qutrit_family(a: float = QUBIT_QUTRIT_RATES[0], b: float = QUBIT_QUTRIT_RATES[1]):
    return channels.family_for((2, 3), a, b)


def luo_pair(spec: str | Sequence[str], dims) -> tuple:
    """Parse 'sx,f01' style names into a pair of unitaries."""
    names = spec.split(",") if isinstance(spec, str) else list(spec)
    if len(names) != 2:
        raise ParameterError("a local-unitary pair needs two names")
    return (channels.local_unitary(names[0], dims[0]), channels.local_unitary(names[1], dims[1]))


def qq3_manipulation_curves(state, luo, x: Optional[float] = None, grid: int = 120) -> RegimeReport:
    """Regime report for a qubit-qutrit family ('I' or 'II') under a LUO pair."""
    from .states import qubit_qutrit_state_I, qubit_qutrit_state_II

    if isinstance(state, DensityMatrix):
        rho0 = state
    elif str(state).upper() == "I":
        rho0 = qubit_qutrit_state_I(0.25 if x is None else x)
    elif str(state).upper() == "II":
        rho0 = qubit_qutrit_state_II(0.5 if x is None else x)
    else:
        raise ParameterError("state must be 'I', 'II' or a DensityMatrix")
    pair = luo_pair(luo, (2, 3)) if isinstance(luo, (str, list)) else luo
    return numeric_regime_report(rho0, qubit_qutrit_family(), pair, grid=grid)


def two_qutrit_family(a: float, b: float, swap_levels: bool = True):
    """Damping for two qutrits with ratios (a, b).

    With ``swap_levels`` the ratio ``a`` drives level 2 (the level carrying
    the |00>-|22> coherence) and ``b`` drives level 1.
    """
    if swap_levels:
        a, b = b, a
    return channels.family_for((3, 3), a, b)


def qutrit_qutrit_nsd(
    x: float, a: float = 1.0, b: float = 0.75, luo=None, grid: int = 80, swap_levels: bool = True,
) -> RegimeReport:
    """Negativity sudden death of the two-qutrit family and its manipulation.

    The report carries realigned negativities just after the NSD point as a
    bound-entanglement probe in ``extras['realigned_after']``.
    """
    from .measures import realigned_negativity
    from .states import two_qutrit_state

    rho0 = two_qutrit_state(x)
    fam = two_qutrit_family(a, b, swap_levels)
    p0 = numeric_esd_point(rho0, fam)
    probes = {}
    if p0 < AVOIDED:
        for dp in (1e-3, 1e-2, 5e-2):
            p = min(p0 + dp, 1.0)
            rho = channels.apply(rho0, fam(p))
            probes[round(p, 6)] = realigned_negativity(rho)
    if luo is None or p0 >= AVOIDED or p0 <= 0:
        rep = RegimeReport(p0=p0)
    else:
        pair = luo_pair(luo, (3, 3)) if isinstance(luo, (str, list)) else luo
        rep = numeric_regime_report(rho0, fam, pair, grid=grid, p0=p0)
    rep.extras["realigned_after"] = probes
    return rep


# ========================================================= sweeps

def run_grid(func: Callable[[float], object], points: Sequence[float], jobs: int = 1) -> list:
    """Evaluate ``func`` on every point; output order follows ``points``."""
    if jobs <= 1:
        return [func(p) for p in points]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, points))


def negativity_sweep(rho0: DensityMatrix, family, ps: Sequence[float], jobs: int = 1) -> list:
    """(p, negativity) rows along a single damping trajectory."""
    from .measures import negativity

    def one(p):
        return (float(p), negativity(channels.apply(rho0, family(float(p)))))

    return run_grid(one, list(ps), jobs)
