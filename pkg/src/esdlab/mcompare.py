"""Comparing entanglement measures on pure states.

Fractional deviations from the maximally entangled state (Q parameters),
their pairwise gaps, derivative forms, extremum search, qutrit analogues,
non-monotonicity witnesses, the distance pair D/C and the Bell-CHSH
deviation. Q values are fractions; ``as_percent`` renders them x100.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ParameterError

LOG2_3 = float(np.log2(3.0))
BV_MAX = 2.0 * np.sqrt(2.0) - 2.0
INV_SQRT2 = 1.0 / np.sqrt(2.0)


def _c0(c0: float) -> tuple[float, float]:
    c0 = float(c0)
    if not 0.0 <= c0 <= 1.0:
        raise ParameterError(f"c0={c0} outside [0, 1]")
    return c0, float(np.sqrt(max(0.0, 1.0 - c0 * c0)))


def _xlog2x(s: np.ndarray) -> float:
    s = np.asarray(s, dtype=float)
    s = s[s > 0]
    return float(np.sum(s * np.log2(s)))


# ---------------------------------------------------------- two qubits

def qubit_measures(c0: float) -> dict:
    """N, LN and EOF of c0|00> + c1|11>."""
    c0, c1 = _c0(c0)
    n = c0 * c1
    return {"N": n, "LN": float(np.log2(2 * n + 1)), "EOF": -_xlog2x([c0 * c0, c1 * c1])}


def q_params(c0: float) -> tuple[float, float, float]:
    m = qubit_measures(c0)
    return ((0.5 - m["N"]) / 0.5, 1.0 - m["LN"], 1.0 - m["EOF"])


def delta_q(c0: float) -> tuple[float, float, float]:
    qn, ql, qe = q_params(c0)
    return (abs(qn - ql), abs(qe - ql), abs(qn - qe))


def em_derivatives(c0: float) -> tuple[float, float, float]:
    """dN/dc0, dLN/dc0, dEOF/dc0 along the pure-state family."""
    c0 = float(c0)
    if not 0.0 < c0 < 1.0:
        raise ParameterError("derivatives are defined for 0 < c0 < 1")
    s = np.sqrt(1.0 - c0 * c0)
    dn = (1.0 - 2.0 * c0 * c0) / s
    dln = 2.0 * dn / ((2.0 * c0 * s + 1.0) * np.log(2.0))
    deof = 2.0 * c0 * np.log2((1.0 - c0 * c0) / (c0 * c0))
    return (float(dn), float(dln), float(deof))


@dataclass
class DeviationRow:
    c0: float
    measures: dict
    q: dict
    dq: dict
    c1: float | None = None

    def as_percent(self) -> dict:
        out = {k: 100.0 * v for k, v in self.q.items()}
        out.update({k: 100.0 * v for k, v in self.dq.items()})
        return out


def deviation_row(c0: float) -> DeviationRow:
    qn, ql, qe = q_params(c0)
    dnl, del_, dne = delta_q(c0)
    return DeviationRow(c0=float(c0), measures=qubit_measures(c0),
                        q={"QN": qn, "QL": ql, "QE": qe},
                        dq={"dQNL": dnl, "dQEL": del_, "dQNE": dne})


GAP_NAMES = ("dQNL", "dQEL", "dQNE")


@dataclass(frozen=True)
class Extremum:
    name: str
    c0: float
    value: float
    mirror: float = field(default=float("nan"))


def _golden_max(f, grid: np.ndarray, tol: float) -> tuple[float, float]:
    vals = np.array([f(x) for x in grid])
    k = int(np.clip(np.argmax(vals), 1, len(grid) - 2))
    res = optimize.minimize_scalar(lambda x: -f(x), bracket=(grid[k - 1], grid[k], grid[k + 1]),
                                   method="golden", options={"xtol": tol})
    return float(res.x), float(-res.fun)


def max_delta_q(step: float = 1e-4, tol: float = 1e-7) -> list[Extremum]:
    """Largest value of each ΔQ over 0 < c0 < 1/√2, with the mirror c0 = √(1 - c0*²)."""
    grid = np.arange(step, INV_SQRT2, step)
    out = []
    for idx, name in enumerate(GAP_NAMES):
        x, val = _golden_max(lambda c: delta_q(c)[idx], grid, tol)
        out.append(Extremum(name, x, val, float(np.sqrt(1 - x * x))))
    return out


# --------------------------------------------------------- two qutrits

def _triple(c0: float, c1: float) -> np.ndarray:
    c0, c1 = float(c0), float(c1)
    if c0 < 0 or c1 < 0:
        raise ParameterError("Schmidt coefficients must be non-negative")
    rest = 1.0 - c0 * c0 - c1 * c1
    if rest < -1e-12:
        raise ParameterError(f"c0²+c1² = {1 - rest:.6g} exceeds 1")
    return np.array([c0, c1, np.sqrt(max(0.0, rest))])


def qutrit_measures(c0: float, c1: float) -> dict:
    """E, N and C of c0|00> + c1|11> + c2|22>."""
    c = _triple(c0, c1)
    s = c * c
    pairs = s[0] * s[1] + s[1] * s[2] + s[2] * s[0]
    return {"E": -_xlog2x(s),
            "N": float(c[0] * c[1] + c[1] * c[2] + c[2] * c[0]),
            "C": float(np.sqrt(3.0 * pairs))}


def qutrit_q_params(c0: float, c1: float) -> tuple[float, float, float]:
    m = qutrit_measures(c0, c1)
    return ((LOG2_3 - m["E"]) / LOG2_3, 1.0 - m["N"], 1.0 - m["C"])


def qutrit_delta_q(c0: float, c1: float) -> tuple[float, float, float]:
    qe, qn, qc = qutrit_q_params(c0, c1)
    return (abs(qn - qe), abs(qe - qc), abs(qn - qc))


QUTRIT_GAP_NAMES = ("dQNE", "dQEC", "dQNC")


def qutrit_deviation_row(c0: float, c1: float) -> DeviationRow:
    qe, qn, qc = qutrit_q_params(c0, c1)
    a, b, c = qutrit_delta_q(c0, c1)
    return DeviationRow(c0=float(c0), c1=float(c1), measures=qutrit_measures(c0, c1),
                        q={"QE": qe, "QN": qn, "QC": qc},
                        dq={"dQNE": a, "dQEC": b, "dQNC": c})


def _from_angles(t: np.ndarray) -> np.ndarray:
    a, b = t
    return np.abs([np.cos(a), np.sin(a) * np.cos(b), np.sin(a) * np.sin(b)])


def canonical_pair(c) -> tuple[float, float]:
    """Measures are symmetric in (c0, c1, c2): put the smallest last, the others ascending."""
    c = sorted(float(x) for x in c)
    return (c[1], c[2])


@dataclass(frozen=True)
class QutritExtremum:
    name: str
    c0: float
    c1: float
    value: float


def qutrit_max_delta_q(n: int = 91) -> list[QutritExtremum]:
    """Maximize each qutrit ΔQ over the positive octant of the unit sphere.

    A deterministic angle grid seeds a Nelder-Mead polish; coordinates are
    taken in absolute value so the c2 = 0 edge is an interior point.
    """
    ang = np.linspace(0.0, np.pi / 2, n)
    aa, bb = np.meshgrid(ang, ang, indexing="ij")
    out = []
    for idx, name in enumerate(QUTRIT_GAP_NAMES):
        def f(t, idx=idx):
            c = _from_angles(t)
            return -qutrit_delta_q(*canonical_pair(c))[idx]
        vals = np.array([[f((a, b)) for b in ang] for a in ang])
        k = np.unravel_index(np.argmin(vals), vals.shape)
        res = optimize.minimize(f, x0=[aa[k], bb[k]], method="Nelder-Mead",
                                options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": 4000})
        c0, c1 = canonical_pair(_from_angles(res.x))
        out.append(QutritExtremum(name, c0, c1, float(-res.fun)))
    return out


def non_monotonicity_witness(pair_a, pair_b, m_x: str, m_y: str) -> bool:
    """True when measures m_x and m_y order the two states oppositely."""
    ma = qutrit_measures(*pair_a)
    mb = qutrit_measures(*pair_b)
    for m in (m_x, m_y):
        if m not in ma:
            raise ParameterError(f"unknown qutrit measure {m!r}; use E, N or C")
    return (ma[m_x] - mb[m_x]) * (ma[m_y] - mb[m_y]) < 0


# ------------------------------------------- distance and nonlocality

def _pure(c0: float, c1: float) -> np.ndarray:
    psi = np.zeros(4)
    psi[0], psi[3] = c0, c1
    return np.outer(psi, psi)


def distance_D(c0: float) -> float:
    """Frobenius distance to the phase-aligned (|00> + |11>)/√2 projector."""
    c0, c1 = _c0(c0)
    diff = _pure(c0, c1) - _pure(INV_SQRT2, INV_SQRT2)
    return float(np.sqrt(np.sum(diff * diff)))


def closeness_C(c0: float) -> float:
    c0, c1 = _c0(c0)
    ov = (c0 + c1) * INV_SQRT2
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * ov * ov)))


def bell_bv(c0: float) -> float:
    """Maximal CHSH value minus the local bound 2."""
    c0, c1 = _c0(c0)
    return float(2.0 * np.sqrt(1.0 + (2.0 * c0 * c1) ** 2) - 2.0)


def q_bv(c0: float) -> float:
    return float((BV_MAX - bell_bv(c0)) / BV_MAX)


def compare_rows(c0s) -> list[DeviationRow]:
    return [deviation_row(c) for c in c0s]
