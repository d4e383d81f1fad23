"""Simulated polarization tomography and the optics calculators around it.

Jones convention
----------------
Wave-plate angles are in degrees measured from vertical. The matrices are
the textbook fast-axis forms with the rotation sense reversed (angle -> -angle)
and the quarter-wave retardance taken with the opposite sign (complex
conjugate), QWP scaled by 1/sqrt(2) to be unitary. With a horizontal
polarizer after the plates, this is the one sign choice under which the
six single-qubit settings land on H, R, L, D, V, A in the standard Pauli
frame (D = (1,1)/√2, R = (1,i)/√2), so that s1, s2, s3 are the σx, σy, σz
expectations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize, stats

from . import linalg
from .errors import ConvergenceError, DimensionError, ParameterError, PhysicalityError
from .states import DensityMatrix, StokesVector, stokes_array_to_matrix

C_UM_PER_FS = 0.299792458
PROJECTOR_TOL = 1e-10

# ------------------------------------------------------------ Jones algebra


def jones_qwp(q_deg: float) -> np.ndarray:
    t = -np.deg2rad(q_deg)
    c, s = np.cos(2 * t), np.sin(2 * t)
    fast = np.array([[1j - c, s], [s, 1j + c]])
    return np.conj(fast) / np.sqrt(2.0)


def jones_hwp(h_deg: float) -> np.ndarray:
    t = -np.deg2rad(h_deg)
    c, s = np.cos(2 * t), np.sin(2 * t)
    return np.array([[c, -s], [-s, -c]], dtype=complex)


LPH = np.array([[1, 0], [0, 0]], dtype=complex)


@dataclass(frozen=True)
class WaveplateSetting:
    qwp_deg: float
    hwp_deg: float

    def __post_init__(self):
        object.__setattr__(self, "qwp_deg", float(self.qwp_deg) % 180.0)
        object.__setattr__(self, "hwp_deg", float(self.hwp_deg) % 180.0)


def analyzed_state(s: WaveplateSetting) -> np.ndarray:
    """Unit vector |φ> with transmitted amplitude <φ|ψ> for input |ψ>."""
    m = LPH @ jones_hwp(s.hwp_deg) @ jones_qwp(s.qwp_deg)
    phi = np.conj(m[0, :])
    nrm = np.linalg.norm(phi)
    if nrm < 1e-12:
        raise PhysicalityError("wave-plate settings transmit nothing")
    return phi / nrm


def projector_from_settings(*settings: WaveplateSetting) -> np.ndarray:
    """Rank-1 projector for one setting per arm (tensor product over arms)."""
    if not settings:
        raise ParameterError("need at least one wave-plate setting")
    p = None
    for s in settings:
        phi = analyzed_state(s)
        one = np.outer(phi, np.conj(phi))
        p = one if p is None else linalg.tensor_product(p, one)
    return p


BASIS_SETTINGS = {
    "H": WaveplateSetting(0, 0),
    "R": WaveplateSetting(45, 0),
    "L": WaveplateSetting(0, 22.5),
    "D": WaveplateSetting(45, 22.5),
    "V": WaveplateSetting(0, 45),
    "A": WaveplateSetting(45, 67.5),
}
BASIS_ORDER = ("H", "R", "L", "D", "V", "A")

_R2 = np.sqrt(0.5)
BASIS_STATES = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_R2, _R2], dtype=complex),
    "A": np.array([_R2, -_R2], dtype=complex),
    "R": np.array([_R2, 1j * _R2], dtype=complex),
    "L": np.array([_R2, -1j * _R2], dtype=complex),
}

# Pauli axis -> (+1 outcome, -1 outcome)
_AXES = {1: ("D", "A"), 2: ("R", "L"), 3: ("H", "V")}


def two_qubit_settings() -> list[tuple[str, str]]:
    """The 36 product bases, arm 1 outer, both arms in H R L D V A order."""
    return [(a, b) for a in BASIS_ORDER for b in BASIS_ORDER]


def single_qubit_stokes_from_probs(p_h, p_v, p_d, p_a, p_r, p_l) -> StokesVector:
    for name, a, b in (("H/V", p_h, p_v), ("D/A", p_d, p_a), ("R/L", p_r, p_l)):
        if abs(a + b - 1.0) > 1e-9:
            raise ParameterError(f"{name} probabilities sum to {a + b}, not 1")
    return StokesVector(1.0, p_d - p_a, p_r - p_l, p_h - p_v)


# -------------------------------------------------------------- records

@dataclass(frozen=True)
class MeasurementRecord:
    settings: tuple
    projector: np.ndarray = field(repr=False)
    counts: float
    duration: float = 1.0
    label: str = ""

    def __post_init__(self):
        p = self.projector
        if np.max(np.abs(p @ p - p)) > PROJECTOR_TOL or abs(np.trace(p).real - 1) > PROJECTOR_TOL:
            raise PhysicalityError("projector is not rank-1 idempotent")
        if self.counts < 0:
            raise ParameterError("counts must be non-negative")


def _records_for(labels: Sequence[tuple[str, ...]]):
    out = []
    for lab in labels:
        sets = tuple(BASIS_SETTINGS[x] for x in lab)
        out.append((lab, sets, projector_from_settings(*sets)))
    return out


def simulate_counts(
    rho: DensityMatrix,
    settings: Optional[Sequence] = None,
    flux: float = 1e4,
    seed: int = 0,
    noise: Optional[str] = "poisson",
    duration: float = 1.0,
) -> list[MeasurementRecord]:
    """Expected counts flux*Tr[Pρ], optionally Poisson-sampled.

    Poisson draws use the inverse CDF on uniforms from a PCG64 generator
    seeded with ``seed``. ``settings`` holds basis-label tuples, defaulting
    to the 36 two-qubit product bases.
    """
    if flux <= 0:
        raise ParameterError("flux must be positive")
    if settings is None:
        settings = two_qubit_settings()
    settings = [tuple(s) for s in settings]
    if any(len(s) != len(rho.dims) for s in settings):
        raise DimensionError("one basis label per qubit is required")
    recs = _records_for(settings)
    probs = np.array([np.real(np.trace(p @ rho.mat)) for _, _, p in recs])
    mean = flux * np.clip(probs, 0.0, None)
    if noise is None:
        counts = mean
    elif str(noise).lower() == "poisson":
        u = np.random.Generator(np.random.PCG64(seed)).random(len(mean))
        counts = np.where(mean > 0, stats.poisson.ppf(u, np.where(mean > 0, mean, 1.0)), 0.0)
    else:
        raise ParameterError(f"unknown noise model {noise!r}")
    return [MeasurementRecord(sets, p, float(c), duration, "".join(lab))
            for (lab, sets, p), c in zip(recs, counts)]


# ------------------------------------------------------ linear inversion

def _count_table(records) -> dict:
    table = {}
    for r in records:
        lab = r.label or None
        if lab is None:
            raise ParameterError("records need basis labels for linear inversion")
        table[lab] = r.counts / r.duration
    return table


def linear_inversion_2q(records) -> np.ndarray:
    """Two-photon Stokes parameters from count ratios, ρ = ¼ Σ r_ij σi⊗σj.

    Single-arm parameters r_i0 and r_0j are averaged over the three
    partner bases. The result is Hermitian with unit trace but need not
    be positive.
    """
    n = _count_table(records)
    missing = [a + b for a, b in two_qubit_settings() if a + b not in n]
    if missing:
        raise ParameterError(f"missing settings: {', '.join(missing)}")
    if n["HH"] + n["HV"] + n["VH"] + n["VV"] <= 0:
        raise ParameterError("no counts in the H/V basis")

    def corr(i, j):
        # σ0 on an arm is read out in each of the three bases and averaged
        vals = []
        for ka in ((i,) if i else (1, 2, 3)):
            for kb in ((j,) if j else (1, 2, 3)):
                num = tot = 0.0
                for oa, sa in zip(_AXES[ka], (1, -1 if i else 1)):
                    for ob, sb in zip(_AXES[kb], (1, -1 if j else 1)):
                        num += sa * sb * n[oa + ob]
                        tot += n[oa + ob]
                if tot <= 0:
                    raise ParameterError("a basis pair recorded no counts")
                vals.append(num / tot)
        return float(np.mean(vals))

    r = np.zeros((4, 4))
    r[0, 0] = 1.0
    for i in range(4):
        for j in range(4):
            if i or j:
                r[i, j] = corr(i, j)
    return stokes_array_to_matrix(r)


# ----------------------------------------------------------- T matrices

# (row, col, real index, imag index) of the off-diagonal entries, 1-based t labels
_T16 = ((1, 0, 5, 6), (2, 0, 11, 12), (2, 1, 7, 8), (3, 0, 15, 16), (3, 1, 13, 14), (3, 2, 9, 10))


def t_matrix(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.size == 4:
        return np.array([[t[0], 0], [t[2] + 1j * t[3], t[1]]], dtype=complex)
    if t.size == 16:
        m = np.diag(t[:4]).astype(complex)
        for r, c, re, im in _T16:
            m[r, c] = t[re - 1] + 1j * t[im - 1]
        return m
    raise DimensionError("T-matrix needs 4 or 16 parameters")


def t_matrix_to_rho(t) -> DensityMatrix:
    m = t_matrix(t)
    g = np.conj(m.T) @ m
    tr = np.trace(g).real
    if tr <= 0:
        raise ParameterError("all-zero T parameters")
    dims = (2,) if m.shape[0] == 2 else (2, 2)
    return DensityMatrix(dims, g / tr)


def rho_to_t_params(mat: np.ndarray, floor: float = 1e-9) -> np.ndarray:
    """Parameters of a lower-triangular T with T†T = ρ (after clamping).

    The spectrum is clamped at ``floor`` and renormalized so the
    factorization exists even for rank-deficient or non-PSD input.
    """
    mat = np.asarray(mat, dtype=complex)
    w, v = linalg.hermitian_eigh(mat)
    w = np.clip(w, floor, None)
    w = w / w.sum()
    rho = (v * w[None, :]) @ np.conj(v.T)
    n = rho.shape[0]
    j = np.eye(n)[::-1]
    low = np.linalg.cholesky(j @ rho @ j)
    t_mat = j @ np.conj(low.T) @ j
    if n == 2:
        return np.array([t_mat[0, 0].real, t_mat[1, 1].real, t_mat[1, 0].real, t_mat[1, 0].imag])
    out = np.zeros(16)
    out[:4] = np.real(np.diag(t_mat))
    for r, c, re, im in _T16:
        out[re - 1] = t_mat[r, c].real
        out[im - 1] = t_mat[r, c].imag
    return out


def single_qubit_t_from_stokes(s: StokesVector, t2: float = 1.0) -> np.ndarray:
    """Closed-form single-qubit T parameters (t1, t2, t3, t4) for Stokes s."""
    if abs(1.0 - s.s3) < 1e-12:
        raise ParameterError("closed form is singular at s3 = 1")
    d = 1.0 - s.s3
    t1 = np.sqrt(max(0.0, 1 - s.s1 ** 2 - s.s2 ** 2 - s.s3 ** 2) / d ** 2) * t2
    return np.array([t1, t2, s.s1 / d * t2, s.s2 / d * t2])


# ------------------------------------------------------------------ MLE

@dataclass
class TomographyResult:
    rho_linear: np.ndarray
    rho_mle: DensityMatrix
    t_params: np.ndarray
    likelihood: float
    iterations: int
    history: list = field(default_factory=list, repr=False)


def _likelihood(projs: np.ndarray, counts: np.ndarray, scale: float):
    def f(t):
        rho = t_matrix_to_rho(t).mat
        nbar = scale * np.real(np.einsum("vij,ji->v", projs, rho))
        nbar = np.maximum(nbar, 1e-12)
        return float(np.sum((nbar - counts) ** 2 / (2.0 * nbar)))
    return f


def mle_fit(records, init: Optional[np.ndarray] = None, max_iter: int = 100_000,
            tol: float = 1e-10) -> TomographyResult:
    """Chi-square maximum-likelihood fit over the T-matrix parameters."""
    recs = list(records)
    if len(recs) < 16:
        raise ParameterError("at least 16 projectors are needed")
    table = _count_table(recs)
    scale = table["HH"] + table["HV"] + table["VH"] + table["VV"]
    if scale <= 0:
        raise ParameterError("no counts in the H/V basis")
    projs = np.stack([r.projector for r in recs])
    counts = np.array([r.counts / r.duration for r in recs])
    rho_lin = linear_inversion_2q(recs)
    t0 = rho_to_t_params(rho_lin if init is None else init)
    f = _likelihood(projs, counts, scale)
    history = [f(t0)]

    res = optimize.minimize(
        f, t0, method="Nelder-Mead",
        callback=lambda xk: history.append(f(xk)),
        options={"maxiter": max_iter, "maxfev": 4 * max_iter, "fatol": tol, "xatol": 1e-10,
                 "adaptive": True},
    )
    if not res.success and res.nit >= max_iter:
        raise ConvergenceError(f"MLE did not converge in {max_iter} iterations")
    t = np.asarray(res.x)
    t = t / np.sqrt(np.sum(t * t))
    rho = t_matrix_to_rho(t)
    return TomographyResult(rho_lin, rho, t, float(res.fun), int(res.nit), history)


def tomography_pipeline(rho: DensityMatrix, flux: float = 1e4, seed: int = 0,
                        noise: Optional[str] = "poisson") -> TomographyResult:
    return mle_fit(simulate_counts(rho, flux=flux, seed=seed, noise=noise))


# ----------------------------------------------------------- diagnostics

def pcc(x, y) -> float:
    """Pearson correlation coefficient."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ParameterError("pcc needs two equal-length sequences of at least 2 values")
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = np.sqrt(np.sum(dx * dx)), np.sqrt(np.sum(dy * dy))
    if sx == 0 or sy == 0:
        raise ParameterError("zero variance")
    return float(np.clip(np.sum(dx * dy) / (sx * sy), -1.0, 1.0))


# ---------------------------------------------------------------- optics

SELLMEIER_WINDOW = (0.2, 3.0)


def sellmeier_bbo(lambda_um: float) -> tuple[float, float]:
    """Ordinary and extraordinary indices of BBO (λ in µm)."""
    lam = float(lambda_um)
    if not SELLMEIER_WINDOW[0] <= lam <= SELLMEIER_WINDOW[1]:
        raise ParameterError(f"λ = {lam} µm outside the {SELLMEIER_WINDOW} µm window")
    l2 = lam * lam
    no2 = 2.7359 + 0.01878 / (l2 - 0.01822) - 0.01354 * l2
    ne2 = 2.3753 + 0.01224 / (l2 - 0.01667) - 0.01516 * l2
    return float(np.sqrt(no2)), float(np.sqrt(ne2))


def n_e_theta(n_o: float, n_e: float, theta_rad: float) -> float:
    """Extraordinary index at angle θ to the optic axis: n_o at 0, n_e at 90°."""
    s, c = np.sin(theta_rad), np.cos(theta_rad)
    return float(n_o * n_e / np.sqrt(n_e ** 2 * c * c + n_o ** 2 * s * s))


def phase_match_residual(theta_rad: float, lambda_p_um: float) -> float:
    no_p, ne_p = sellmeier_bbo(lambda_p_um)
    no_s, _ = sellmeier_bbo(2 * lambda_p_um)
    return n_e_theta(no_p, ne_p, theta_rad) - no_s


def phase_match_angle(lambda_p_um: float) -> float:
    """Degenerate collinear type-I angle (radians) by bisection."""
    lo, hi = 1e-9, np.pi / 2
    if phase_match_residual(lo, lambda_p_um) * phase_match_residual(hi, lambda_p_um) > 0:
        raise ParameterError("no phase-matching angle in (0, 90°)")
    return float(optimize.bisect(phase_match_residual, lo, hi, args=(lambda_p_um,),
                                 xtol=1e-13, maxiter=200))


def coherence(lambda_nm: float, dlambda_nm: float) -> tuple[float, float]:
    """Coherence length (µm) and time (fs) from centre wavelength and bandwidth."""
    if lambda_nm <= 0 or dlambda_nm <= 0:
        raise ParameterError("wavelength and bandwidth must be positive")
    l_c = lambda_nm ** 2 / dlambda_nm * 1e-3
    return float(l_c), float(l_c / C_UM_PER_FS)


def decoherence_factor(dtau_fs: float, tau_c_fs: float) -> float:
    if tau_c_fs <= 0 or dtau_fs < 0:
        raise ParameterError("need dtau >= 0 and tau_c > 0")
    return float(np.exp(-dtau_fs / tau_c_fs))


def decohere_corner(rho: DensityMatrix, factor: float) -> DensityMatrix:
    """Scale the |00><11| coherence of a two-qubit state."""
    if rho.dims != (2, 2):
        raise DimensionError("corner decoherence acts on two qubits")
    m = rho.mat.copy()
    m[0, 3] *= factor
    m[3, 0] *= factor
    return DensityMatrix((2, 2), m)
