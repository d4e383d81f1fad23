"""State constructors, Schmidt decomposition and Stokes representations.

Basis ordering is row-major over subsystems with index 0 as the ground level:
two qubits {|00>,|01>,|10>,|11>}, qubit-qutrit {|00>,|01>,|02>,|10>,|11>,|12>},
two qutrits {|00>,...,|22>}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionError, ParameterError, PhysicalityError

TRACE_TOL = 1e-10
PSD_TOL = 1e-9


@dataclass(frozen=True)
class DensityMatrix:
    dims: tuple
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        m = linalg.as_matrix(self.mat).copy()
        n = int(np.prod(dims))
        if m.shape != (n, n):
            raise DimensionError(f"matrix shape {m.shape} does not match dims {dims}")
        m.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "mat", m)

    @classmethod
    def checked(cls, mat, dims) -> "DensityMatrix":
        """Build and verify trace, Hermiticity and positivity."""
        rho = cls(tuple(dims), mat)
        rho.validate()
        return rho

    def validate(self) -> None:
        tr = np.trace(self.mat)
        if abs(tr - 1.0) > TRACE_TOL:
            raise PhysicalityError(f"trace is {tr.real:.12g}, expected 1")
        defect = linalg.hermitian_defect(self.mat)
        if defect > linalg.HERMITIAN_TOL:
            raise PhysicalityError(f"not Hermitian (defect {defect:.3e})")
        lo = linalg.hermitian_eigenvalues(self.mat)[0]
        if lo < -PSD_TOL:
            raise PhysicalityError(f"not positive semidefinite (min eigenvalue {lo:.3e})")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return linalg.hermitian_eigenvalues(self.mat)

    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))

    def to_json(self) -> str:
        def fmt_rows(a):
            return "[" + ",".join("[" + ",".join(_g17(x) for x in row) + "]" for row in a) + "]"
        return (
            '{"dims":' + json.dumps(list(self.dims)) + ',"re":' + fmt_rows(self.mat.real)
            + ',"im":' + fmt_rows(self.mat.imag) + "}"
        )

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "re": self.mat.real.tolist(), "im": self.mat.imag.tolist()}

    @classmethod
    def from_dict(cls, d: dict, check: bool = True) -> "DensityMatrix":
        m = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
        return cls.checked(m, d["dims"]) if check else cls(tuple(d["dims"]), m)

    @classmethod
    def from_json(cls, text: str, check: bool = True) -> "DensityMatrix":
        return cls.from_dict(json.loads(text), check=check)


def _g17(x: float) -> str:
    s = f"{float(x):.17g}"
    if s in ("-0", "0"):
        return "0"
    return s


# ---------------------------------------------------------------- X states

def x_state(u: float, v: complex) -> DensityMatrix:
    """Two-qubit X state with populations u on |00>, 1-u on |11> and corner v."""
    if not 0.0 <= u <= 1.0:
        raise ParameterError(f"u={u} outside [0, 1]")
    x = 1.0 - u
    if abs(v) ** 2 > u * x + 1e-12:
        raise PhysicalityError(f"|v|^2={abs(v) ** 2:.6g} exceeds u(1-u)={u * x:.6g}")
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0], m[3, 3] = u, x
    m[0, 3], m[3, 0] = v, np.conj(v)
    return DensityMatrix((2, 2), m)


def _general_x(a, b, c, d, z, inner: bool) -> DensityMatrix:
    if abs(a + b + c + d - 1.0) > 1e-12:
        raise PhysicalityError(f"populations sum to {a + b + c + d}, expected 1")
    if min(a, b, c, d) < 0:
        raise PhysicalityError("populations must be nonnegative")
    bound = b * c if inner else a * d
    if abs(z) ** 2 > bound + 1e-12:
        raise PhysicalityError(f"|z|^2={abs(z) ** 2:.6g} exceeds {'bc' if inner else 'ad'}={bound:.6g}")
    m = np.diag([a, b, c, d]).astype(complex)
    i, j = (1, 2) if inner else (0, 3)
    m[i, j], m[j, i] = z, np.conj(z)
    return DensityMatrix((2, 2), m)


def general_x_state_rho2(a: float, b: float, c: float, d: float, z: complex) -> DensityMatrix:
    """diag(a, b, c, d) with outer corners z, excited-first.

    In this family the first basis vector is the doubly excited level; use
    :func:`swap_ground_excited` to move it into the ground-first basis.
    """
    return _general_x(a, b, c, d, z, inner=False)


def general_x_state_rho1(a: float, b: float, c: float, d: float, z: complex) -> DensityMatrix:
    """diag(a, b, c, d) with inner coherence z between the |01> and |10> slots."""
    return _general_x(a, b, c, d, z, inner=True)


def swap_ground_excited(rho: DensityMatrix) -> DensityMatrix:
    """Relabel ground <-> excited on both qubits (conjugation by σx⊗σx)."""
    if rho.dims != (2, 2):
        raise DimensionError("relabelling is defined for two qubits")
    f = np.kron(linalg.pauli(1), linalg.pauli(1))
    return DensityMatrix((2, 2), f @ rho.mat @ f)


# ----------------------------------------------------- qubit-qutrit, qutrits

def qubit_qutrit_state_I(x: float) -> DensityMatrix:
    """Weight x/2 on |00>,|01>,|11>,|12>; (1-2x)/2 block coupling |02> and |10>."""
    if not 0.0 <= x < 1.0 / 3.0:
        raise ParameterError(f"x={x} outside [0, 1/3)")
    m = np.zeros((6, 6), dtype=complex)
    for k in (0, 1, 4, 5):
        m[k, k] = x / 2
    w = (1 - 2 * x) / 2
    m[2, 2] = m[3, 3] = m[2, 3] = m[3, 2] = w
    return DensityMatrix((2, 3), m)


def qubit_qutrit_state_II(x: float) -> DensityMatrix:
    """Weight x/2 on |00>,|01>,|11>,|12> with |00><12| coherence x/2; (1-2x)/2 on |02>,|10>."""
    if not 1.0 / 3.0 < x <= 0.5:
        raise ParameterError(f"x={x} outside (1/3, 1/2]")
    m = np.zeros((6, 6), dtype=complex)
    for k in (0, 1, 4, 5):
        m[k, k] = x / 2
    m[0, 5] = m[5, 0] = x / 2
    m[2, 2] = m[3, 3] = (1 - 2 * x) / 2
    return DensityMatrix((2, 3), m)


def _two_qutrit_diagonal(x: float) -> np.ndarray:
    if not 0.0 <= x < 1.0 / 3.0:
        raise ParameterError(f"x={x} outside [0, 1/3)")
    m = np.zeros((9, 9), dtype=complex)
    for k in (1, 2, 3, 5, 6, 7):
        m[k, k] = x / 3
    for k in (0, 4, 8):
        m[k, k] = (1 - 2 * x) / 3
    return m


def two_qutrit_state(x: float) -> DensityMatrix:
    """Two-qutrit state with (1-2x)/3 coherence between |00> and |22>.

    Weight x/3 sits on the six off-diagonal-label states |01>,|02>,|10>,|12>,
    |20>,|21>. The only coherence is the |00><22| pair and its conjugate.
    """
    m = _two_qutrit_diagonal(x)
    m[0, 8] = m[8, 0] = (1 - 2 * x) / 3
    return DensityMatrix((3, 3), m)


def two_qutrit_asymmetric_closure(x: float) -> np.ndarray:
    """Hermitian closure of both coherence terms |22><00| and |00><02|.

    Returned as a bare array: for x near 1/4 it is not positive semidefinite.
    """
    m = _two_qutrit_diagonal(x)
    w = (1 - 2 * x) / 3
    m[8, 0] = m[0, 8] = w
    m[0, 2] = m[2, 0] = w
    return m


# ------------------------------------------------------------ pure states

@dataclass(frozen=True)
class SchmidtState:
    coeffs: tuple
    dims: tuple = None

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        if any(v < 0 for v in c):
            raise ParameterError("Schmidt coefficients must be nonnegative")
        if abs(sum(v * v for v in c) - 1.0) > 1e-12:
            raise PhysicalityError("Schmidt coefficients are not normalized")
        dims = self.dims if self.dims is not None else (len(c), len(c))
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "dims", tuple(int(d) for d in dims))


def schmidt_vector(s: SchmidtState) -> np.ndarray:
    d_a, d_b = s.dims
    psi = np.zeros(d_a * d_b, dtype=complex)
    for i, c in enumerate(s.coeffs):
        psi[i * d_b + i] = c
    return psi


def schmidt_pure_density(s: SchmidtState) -> DensityMatrix:
    psi = schmidt_vector(s)
    return DensityMatrix(s.dims, np.outer(psi, np.conj(psi)))


def two_qubit_pure(c0: float) -> DensityMatrix:
    """c0|00> + sqrt(1-c0²)|11>."""
    return schmidt_pure_density(SchmidtState((c0, np.sqrt(max(0.0, 1 - c0 * c0)))))


def schmidt_decompose(psi, dims) -> SchmidtState:
    psi = np.asarray(psi, dtype=complex).ravel()
    d_a, d_b = (int(d) for d in dims)
    if psi.size != d_a * d_b:
        raise DimensionError(f"vector length {psi.size} does not match dims {d_a}x{d_b}")
    norm = np.vdot(psi, psi).real
    if abs(norm - 1.0) > 1e-10:
        raise PhysicalityError(f"state vector has norm² {norm:.12g}")
    sv = linalg.singular_values(psi.reshape(d_a, d_b))
    sv = sv / np.sqrt(np.sum(sv * sv))
    return SchmidtState(tuple(sv), (d_a, d_b))


# ------------------------------------------------------------- Stokes

@dataclass(frozen=True)
class StokesVector:
    s0: float
    s1: float
    s2: float
    s3: float

    def __post_init__(self):
        if abs(self.s0 - 1.0) > 1e-9:
            raise ParameterError("Stokes vectors are normalized to s0 = 1")
        if self.s1 ** 2 + self.s2 ** 2 + self.s3 ** 2 > 1 + 1e-9:
            raise PhysicalityError("Bloch vector longer than 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.s0, self.s1, self.s2, self.s3])


def stokes_to_density(s: StokesVector) -> DensityMatrix:
    m = 0.5 * np.array(
        [[s.s0 + s.s3, s.s1 - 1j * s.s2], [s.s1 + 1j * s.s2, s.s0 - s.s3]], dtype=complex
    )
    return DensityMatrix((2,), m)


def density_to_stokes(rho: DensityMatrix) -> StokesVector:
    if rho.dim != 2:
        raise DimensionError("Stokes parameters need a single qubit")
    s = [float(np.real(np.trace(linalg.pauli(i) @ rho.mat))) for i in range(4)]
    return StokesVector(1.0, s[1] / s[0], s[2] / s[0], s[3] / s[0])


def degree_of_polarization(s: StokesVector) -> float:
    return float(np.sqrt(s.s1 ** 2 + s.s2 ** 2 + s.s3 ** 2))


@dataclass(frozen=True)
class TwoQubitStokes:
    r: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float).copy()
        if r.shape != (4, 4):
            raise DimensionError("two-qubit Stokes array must be 4x4")
        if abs(r[0, 0] - 1.0) > 1e-9 or np.any(np.abs(r) > 1 + 1e-9):
            raise PhysicalityError("r00 must be 1 and all |r_ij| <= 1")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)


_PAULI_PAIRS = np.array(
    [[np.kron(linalg.pauli(i), linalg.pauli(j)) for j in range(4)] for i in range(4)]
)


def two_qubit_stokes(rho: DensityMatrix) -> TwoQubitStokes:
    if rho.dims != (2, 2):
        raise DimensionError("two-qubit Stokes parameters need dims (2, 2)")
    r = np.real(np.einsum("ijab,ba->ij", _PAULI_PAIRS, rho.mat))
    return TwoQubitStokes(r)


def stokes_array_to_matrix(r) -> np.ndarray:
    """rho = 1/4 Σ r_ij σi⊗σj, for an unconstrained 4x4 real array."""
    return 0.25 * np.einsum("ij,ijab->ab", np.asarray(r, dtype=float), _PAULI_PAIRS)


def two_qubit_stokes_to_density(s: TwoQubitStokes) -> DensityMatrix:
    return DensityMatrix((2, 2), stokes_array_to_matrix(s.r))


# --------------------------------------------------------------- random

def random_density(dims, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random full-rank (or given-rank) state from a Ginibre matrix."""
    n = int(np.prod(dims))
    k = n if rank is None else rank
    g = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    m = g @ np.conj(g.T)
    return DensityMatrix(tuple(dims), m / np.trace(m).real)


def random_pure(dims, rng: np.random.Generator) -> np.ndarray:
    n = int(np.prod(dims))
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    return psi / np.linalg.norm(psi)
