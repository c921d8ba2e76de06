"""Free Dirac two-point functions and fermionic Wick sums.

``<psi_a(x) psibar_b(y)> = [(i gamma^mu d_mu + M) D_M^(-)](x - y)_ab`` and
``<psibar_b(x) psi_a(y)> = [(i gamma^mu d_mu - M) D_M^(-)](x - y)_ab``.

Fields are labelled by ``(kind, spinor_index)`` with ``kind`` one of
``"psi"`` or ``"psibar"``.  The full model multiplies the fermionic sum by
the Gaussian determinant factor, with ``psi`` carrying charge ``-1`` and
``psibar`` carrying ``+1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import propagator as prop
from .errors import AlgebraError, SizeMismatchError
from .gaussmodel import rho_vev
from .propagator import ComplexFourVector, DEFAULT_QUAD, QuadratureConfig

PSI = "psi"
PSIBAR = "psibar"
METRIC = np.diag([1.0, -1.0, -1.0, -1.0])
ALGEBRA_TOL = 1e-12

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class GammaBasis:
    """Four 4x4 matrices ``gamma^0 .. gamma^3`` (upper index)."""

    matrices: tuple

    def __post_init__(self):
        mats = tuple(np.array(g, dtype=complex) for g in self.matrices)
        if len(mats) != 4 or any(g.shape != (4, 4) for g in mats):
            raise SizeMismatchError("need four 4x4 matrices")
        object.__setattr__(self, "matrices", mats)

    def __getitem__(self, mu: int) -> np.ndarray:
        return self.matrices[mu]

    @classmethod
    def dirac(cls) -> "GammaBasis":
        z, eye = np.zeros((2, 2)), np.eye(2)
        g0 = np.block([[eye, z], [z, -eye]])
        gk = [np.block([[z, s], [-s, z]]) for s in _SIGMA]
        return cls((g0, *gk))

    def conjugated(self, S) -> "GammaBasis":
        """``S gamma^mu S^-1``."""
        S = np.asarray(S, dtype=complex)
        Si = np.linalg.inv(S)
        return GammaBasis(tuple(S @ g @ Si for g in self.matrices))

    def slash(self, v) -> np.ndarray:
        """``gamma^mu v_mu`` for a lower-index vector ``v``."""
        return sum(v[mu] * self.matrices[mu] for mu in range(4))


DIRAC = GammaBasis.dirac()


class GammaReport(NamedTuple):
    passed: bool
    max_anticommutator_error: float
    hermiticity_error: float


def gamma_check(basis: GammaBasis = DIRAC, tol: float = ALGEBRA_TOL) -> GammaReport:
    """Check ``{gamma^mu, gamma^nu} = 2 eta^{mu nu}`` and ``gamma^0`` hermitian.

    Raises :class:`AlgebraError` whose ``violations`` lists the offending
    ``(mu, nu)`` pairs and/or ``"hermiticity"``.
    """
    eye = np.eye(4)
    violations = []
    worst = 0.0
    for mu in range(4):
        for nu in range(mu, 4):
            ac = basis[mu] @ basis[nu] + basis[nu] @ basis[mu]
            err = float(np.abs(ac - 2.0 * METRIC[mu, nu] * eye).max())
            worst = max(worst, err)
            if err > tol:
                violations.append((mu, nu))
    herm = float(np.abs(basis[0] - basis[0].conj().T).max())
    if herm > tol:
        violations.append("hermiticity")
    if violations:
        raise AlgebraError(f"Clifford relations violated at {violations}", violations)
    return GammaReport(True, worst, herm)


# --- two-point matrices -----------------------------------------------------

def _scalar_and_grad(M: float, z: ComplexFourVector, q: QuadratureConfig, method: str):
    if method == "direct":
        return prop.d_minus(M, z, q), prop.d_minus_grad(M, z, q)
    if method == "decomposed":
        return prop.d_minus_decomposed(M, z, q), prop.d_minus_grad_decomposed(M, z)
    raise ValueError(f"unknown propagator method {method!r}")


def spinor_from_scalar(M: float, D: complex, grad, basis: GammaBasis = DIRAC,
                       sign: int = +1) -> np.ndarray:
    """``i gamma^mu grad_mu + sign M D I`` from precomputed scalar data."""
    return 1j * basis.slash(grad) + sign * M * D * np.eye(4)


def s_minus(M: float, z, q: QuadratureConfig = DEFAULT_QUAD, basis: GammaBasis = DIRAC,
            method: str = "decomposed") -> np.ndarray:
    """``<psi(x) psibar(y)>`` at ``x - y = z`` as a 4x4 matrix."""
    z = ComplexFourVector.of(z)
    D, grad = _scalar_and_grad(M, z, q, method)
    return spinor_from_scalar(M, D, grad, basis, +1)


def sbar_minus(M: float, z, q: QuadratureConfig = DEFAULT_QUAD, basis: GammaBasis = DIRAC,
               method: str = "decomposed") -> np.ndarray:
    """``<psibar_b(x) psi_a(y)>`` at ``x - y = z``, indexed ``[a, b]``."""
    z = ComplexFourVector.of(z)
    D, grad = _scalar_and_grad(M, z, q, method)
    return spinor_from_scalar(M, D, grad, basis, -1)


# --- fermionic Wick sums ----------------------------------------------------

def _labels(labels, n):
    out = []
    for lab in labels:
        kind, idx = lab
        if kind not in (PSI, PSIBAR):
            raise ValueError(f"label kind must be {PSI!r} or {PSIBAR!r}, got {kind!r}")
        if not 0 <= int(idx) < 4:
            raise ValueError(f"spinor index out of range: {idx}")
        out.append((kind, int(idx)))
    if len(out) != n:
        raise SizeMismatchError("one label per point required")
    return out


class _Contractions:
    """Lazily computed ordered contractions ``<O_i O_j>`` for ``i < j``."""

    def __init__(self, M, points, labels, q, basis, method):
        self.M, self.q, self.basis, self.method = M, q, basis, method
        self.points = [ComplexFourVector.of(p) for p in points]
        self.labels = _labels(labels, len(self.points))
        self._cache = {}

    def _matrix(self, i, j):
        key = (i, j)
        if key not in self._cache:
            z = self.points[i] - self.points[j]
            D, grad = _scalar_and_grad(self.M, z, self.q, self.method)
            sign = +1 if self.labels[i][0] == PSI else -1
            self._cache[key] = spinor_from_scalar(self.M, D, grad, self.basis, sign)
        return self._cache[key]

    def ordered(self, i, j) -> complex:
        (ki, ai), (kj, aj) = self.labels[i], self.labels[j]
        if ki == kj:
            return 0j
        S = self._matrix(i, j)
        if ki == PSI:
            return complex(S[ai, aj])
        return complex(S[aj, ai])


def _permutation_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def propagator_matrix(M, points, labels, q=DEFAULT_QUAD, basis=DIRAC, method="decomposed"):
    """Return ``(C, sign)`` with the n-point value ``sign * det C``.

    ``C[a, b]`` contracts the ``a``-th ``psi`` with the ``b``-th ``psibar``;
    when the ``psibar`` stands first the pair is anticommuted, giving
    ``-<psibar psi>``.
    """
    ctr = _Contractions(M, points, labels, q, basis, method)
    psi = [i for i, (k, _) in enumerate(ctr.labels) if k == PSI]
    bar = [i for i, (k, _) in enumerate(ctr.labels) if k == PSIBAR]
    if len(psi) != len(bar):
        return None, 0
    k = len(psi)
    C = np.zeros((k, k), dtype=complex)
    for a, i in enumerate(psi):
        for b, j in enumerate(bar):
            C[a, b] = ctr.ordered(i, j) if i < j else -ctr.ordered(j, i)
    sign = _permutation_sign(psi + bar) * (-1) ** (k * (k - 1) // 2)
    return C, sign


def dirac_npoint(M: float, points, labels, q: QuadratureConfig = DEFAULT_QUAD,
                 basis: GammaBasis = DIRAC, method: str = "decomposed") -> complex:
    """Vacuum expectation of the ordered product of free Dirac fields.

    Zero unless the numbers of ``psi`` and ``psibar`` labels agree.
    """
    C, sign = propagator_matrix(M, points, labels, q, basis, method)
    if C is None:
        return 0j
    if C.shape[0] == 0:
        return 1.0 + 0j
    return complex(sign * np.linalg.det(C))


def dirac_npoint_oracle(M: float, points, labels, q: QuadratureConfig = DEFAULT_QUAD,
                        basis: GammaBasis = DIRAC, method: str = "decomposed") -> complex:
    """Signed enumeration over all complete pairings, in the original order."""
    ctr = _Contractions(M, points, labels, q, basis, method)
    n = len(ctr.points)
    if n % 2:
        return 0j

    def pf(idx):
        if not idx:
            return 1.0 + 0j
        first, rest = idx[0], idx[1:]
        total = 0j
        for pos, j in enumerate(rest):
            c = ctr.ordered(first, j)
            if c != 0:
                total += (-1) ** pos * c * pf(rest[:pos] + rest[pos + 1:])
        return total

    return complex(pf(tuple(range(n))))


def bijection_sum(C) -> complex:
    """``sum_sigma sgn(sigma) prod_a C[a, sigma(a)]`` by explicit enumeration."""
    C = np.asarray(C)
    k = C.shape[0]
    total = 0j
    for perm in itertools.permutations(range(k)):
        total += _permutation_sign(perm) * np.prod([C[a, perm[a]] for a in range(k)])
    return complex(total)


def charges_from_labels(labels) -> tuple:
    return tuple(-1 if kind == PSI else +1 for kind, _ in labels)


def full_model_vev(l: float, m: float, M: float, points, labels, r: Sequence[int] | None = None,
                   q: QuadratureConfig = DEFAULT_QUAD, basis: GammaBasis = DIRAC,
                   method: str = "decomposed") -> complex:
    """Free Dirac n-point value times ``(det A)^(-1/2)`` at the same points."""
    labels = _labels(labels, len(points))
    if r is None:
        r = charges_from_labels(labels)
    free = dirac_npoint(M, points, labels, q, basis, method)
    if free == 0:
        return 0j
    return complex(free * rho_vev(l, m, points, r, q, method))
