"""Vacuum expectations of the exponential Wick fields ``:exp(-r i l^2 phi^2):``.

Charge convention: ``r = -1`` is ``rho = :exp(+i l^2 phi^2):`` and
``r = +1`` is its adjoint ``rho*``.  The n-point function is
``(det A)^(-1/2)`` with unit diagonal and
``a_jk = 2 h_{r_j} h_{r_k} l^2 D_m^(-)(z_j - z_k)``, ``h_{+-1} = e^{+-i pi/4}``.
The square-root branch is the one continuous from ``A = I`` along
``A(s) = I + s (A - I)``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import propagator as prop
from .errors import BranchError, MarginError, MarginWarning, SizeMismatchError
from .propagator import ComplexFourVector, DEFAULT_QUAD, QuadratureConfig
from .wickcomb import PairingMatrix, WickSeries, jaffe_vev, mixed_jaffe_vev

BRANCH_STEPS = 64
DEFAULT_TRUNC = 40


def _charges(r) -> tuple:
    r = tuple(int(v) for v in r)
    if any(v not in (1, -1) for v in r):
        raise ValueError(f"charges must be +1 or -1, got {r}")
    return r


def phase_h(r: int) -> complex:
    """``h_r = exp(i r pi / 4)``."""
    (r,) = _charges([r])
    return cmath.exp(1j * r * math.pi / 4.0)


@dataclass(frozen=True)
class ContourSpec:
    """Imaginary-time offsets ``y_j`` of the planes ``R^4 + i (y_j, 0, 0, 0)``."""

    y: tuple
    min_gap: float = 0.0

    def __post_init__(self):
        y = tuple(float(v) for v in self.y)
        object.__setattr__(self, "y", y)
        gaps = np.diff(y)
        if np.any(gaps <= self.min_gap):
            raise MarginError(f"offsets must increase by more than {self.min_gap}: {y}")

    def points(self, xs) -> list[ComplexFourVector]:
        xs = np.asarray(xs, dtype=float)
        if xs.shape != (len(self.y), 4):
            raise SizeMismatchError("one real 4-vector per contour")
        out = []
        for x, y in zip(xs, self.y):
            out.append(ComplexFourVector(x[0] + 1j * y, x[1], x[2], x[3]))
        return out


def _two_point(m, zeta, q, method):
    if method == "direct":
        return prop.d_minus(m, zeta, q)
    if method == "decomposed":
        return prop.d_minus_decomposed(m, zeta, q)
    raise ValueError(f"unknown propagator method {method!r}")


def pairing_from_points(m, points, q=DEFAULT_QUAD, method="decomposed") -> PairingMatrix:
    """``t_jk = D_m^(-)(z_j - z_k)`` for ``j < k``."""
    pts = [ComplexFourVector.of(p) for p in points]
    n = len(pts)
    t = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for k in range(j + 1, n):
            t[j, k] = t[k, j] = _two_point(m, pts[j] - pts[k], q, method)
    return PairingMatrix(t)


def a_matrix_from_pairing(l: float, t: PairingMatrix, r) -> np.ndarray:
    r = _charges(r)
    if len(r) != t.size:
        raise SizeMismatchError("one charge per point required")
    h = np.array([phase_h(v) for v in r])
    A = 2.0 * l * l * np.outer(h, h) * t.t
    np.fill_diagonal(A, 1.0)
    return A


def build_A(l: float, m: float, points, r, q: QuadratureConfig = DEFAULT_QUAD,
            method: str = "decomposed") -> np.ndarray:
    r = _charges(r)
    if len(r) != len(points):
        raise SizeMismatchError("one charge per point required")
    if l == 0:
        return np.eye(len(points), dtype=complex)
    return a_matrix_from_pairing(l, pairing_from_points(m, points, q, method), r)


def det_inv_sqrt(A, steps: int = BRANCH_STEPS, max_depth: int = 12) -> complex:
    """``(det A)^(-1/2)`` on the branch continuous from 1 at ``A = I``.

    The argument of ``det(I + s (A - I))`` is accumulated over ``steps``
    equal steps in ``s``; a step whose phase change exceeds ``pi/4`` is
    bisected.  Raises :class:`BranchError` if the determinant (nearly)
    vanishes on the path.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n):
        raise SizeMismatchError("A must be square")
    B = A - np.eye(n)
    scale = 1.0 + np.abs(B).sum()
    tiny = 1e-13 * scale**n

    def det_at(s):
        return np.linalg.det(np.eye(n) + s * B)

    def advance(s0, d0, s1, depth):
        d1 = det_at(s1)
        if abs(d1) < tiny:
            raise BranchError(f"det A(s) vanishes near s = {s1:.6g}", s=s1)
        dphi = cmath.phase(d1 / d0)
        if abs(dphi) > math.pi / 4:
            if depth >= max_depth:
                raise BranchError(f"det A(s) winds too fast near s = {s1:.6g}", s=s1)
            sm = 0.5 * (s0 + s1)
            dm, phm = advance(s0, d0, sm, depth + 1)
            d1, ph2 = advance(sm, dm, s1, depth + 1)
            return d1, phm + ph2
        return d1, dphi

    d = 1.0 + 0j
    arg = 0.0
    grid = np.linspace(0.0, 1.0, steps + 1)
    for s0, s1 in zip(grid[:-1], grid[1:]):
        d, dphi = advance(s0, d, s1, 0)
        arg += dphi
    return abs(d) ** -0.5 * cmath.exp(-0.5j * arg)


def det_inv_sqrt_eigen(A) -> complex:
    """Same branch via ``prod (1 + lambda_i)^(-1/2)`` over eigenvalues of ``A - I``.

    Each factor ``1 + s lambda`` traces a straight segment from 1, so the
    continuous branch of every factor is the principal one.
    """
    A = np.asarray(A, dtype=complex)
    lam = np.linalg.eigvals(A - np.eye(A.shape[0]))
    for v in lam:
        if abs(v.imag) <= 1e-14 * max(1.0, abs(v)) and v.real <= -1.0:
            raise BranchError(f"eigenvalue {v} puts a zero of det A(s) on the path",
                              s=-1.0 / v.real)
    return complex(np.prod((1.0 + lam) ** -0.5))


def rho_vev(l, m, points, r, q: QuadratureConfig = DEFAULT_QUAD, method="decomposed") -> complex:
    """``<rho^(1)(z_1) ... rho^(n)(z_n)> = (det A)^(-1/2)``."""
    return det_inv_sqrt(build_A(l, m, points, r, q, method))


def rho_series(r: int, l: float, order: int) -> WickSeries:
    """Wick series of ``:exp(-r i l^2 phi^2):``."""
    return WickSeries.exp_square(-r * l * l, order)


def rho_vev_series(l, m, points, r, trunc: int = DEFAULT_TRUNC,
                   q: QuadratureConfig = DEFAULT_QUAD, method="decomposed",
                   pairing: PairingMatrix | None = None) -> complex:
    """Truncated multi-index sum for the same vacuum expectation."""
    r = _charges(r)
    if len(r) != len(points):
        raise SizeMismatchError("one charge per point required")
    if trunc == 0 or l == 0:
        return 1.0 + 0j
    t = pairing if pairing is not None else pairing_from_points(m, points, q, method)
    from .wickcomb import convergence_margin

    margin = convergence_margin(l * l, t)
    if margin <= 0:
        warnings.warn(f"convergence margin {margin:.3g} is not positive", MarginWarning, stacklevel=2)
    series = [rho_series(v, l, trunc) for v in r]
    return jaffe_vev(series, t, trunc)


def q_perturbation(A, j: int) -> complex:
    """``Q_{n,j} = det A - 1 + a_{j,j+1}^2`` for 1-based ``j``.

    What remains of ``det A - 1`` after removing the pure
    ``a_{j,j+1}`` transposition term.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if not 1 <= j <= n - 1:
        raise IndexError(f"j must lie in 1..{n - 1}, got {j}")
    return complex(np.linalg.det(A) - 1.0 + A[j - 1, j] ** 2)


def holomorphy_margin(l, m, points, q: QuadratureConfig = DEFAULT_QUAD, method="decomposed") -> float:
    """``min_{j<k} (1 - 2 l^2 |D(z_j - z_k)|)``."""
    if l == 0 or len(points) < 2:
        return 1.0
    t = pairing_from_points(m, points, q, method)
    return float(min(1.0 - 2.0 * l * l * abs(t.t[i, k]) for i, k in t.pairs()))


def deq_residual(l: float, m: float, zeta, mu: int, trunc: int,
                 q: QuadratureConfig = DEFAULT_QUAD) -> complex:
    """Correlator form of ``d_mu rho = 2 i l^2 :(d_mu phi) phi rho:``.

    Left side: ``d/dzeta^mu`` of ``<rho(x) rho*(y)> = (1 - 4 l^4 D^2)^(-1/2)``
    at ``x - y = zeta``, i.e. ``4 l^4 D d_mu D (1 - 4 l^4 D^2)^(-3/2)``.
    Right side: ``2 i l^2`` times the truncated multi-index sum for
    ``<:(d_mu phi) phi rho:(x) rho*(y)>``.  Returns left minus right.
    """
    if l == 0:
        return 0j
    zeta = ComplexFourVector.of(zeta)
    D = prop.d_minus(m, zeta, q)
    grad = prop.d_minus_grad(m, zeta, q)
    l4 = l**4
    lhs = 4.0 * l4 * D * grad[mu] * (1.0 - 4.0 * l4 * D * D) ** -1.5

    order = trunc + 2
    coeffs = [0j] * (order + 1)
    for k in range((order - 2) // 2 + 1):
        # :(d phi) phi^(2k+1): / (2k+1)! carries (i l^2)^k (2k+1)!/k!
        coeffs[2 * k + 2] = (1j * l * l) ** k * (math.factorial(2 * k + 1) / math.factorial(k))
    tagged = WickSeries(coeffs)
    t = np.array([[0, D], [D, 0]], dtype=complex)
    dt = np.zeros((2, 2, 4), dtype=complex)
    dt[0, 1] = grad
    pairing = PairingMatrix.translation_invariant(t, dt)
    rhs = 2j * l * l * mixed_jaffe_vev([tagged, rho_series(+1, l, order)], pairing, 0, mu, trunc)
    return complex(lhs - rhs)


# --- relative coordinates ---------------------------------------------------

def chi_map(n: int, q):
    """``p_k = q_{k-1} - q_k`` (k < n), ``p_n = q_{n-1}``; ``q`` indexed from 0."""
    q = np.asarray(q)
    if q.shape[0] != n:
        raise SizeMismatchError(f"expected {n} vectors, got {q.shape[0]}")
    p = np.empty_like(q)
    p[: n - 1] = q[: n - 1] - q[1:]
    p[n - 1] = q[n - 1]
    return p


def chi_inv(n: int, p):
    """``q_k = sum_{j > k} p_j``."""
    p = np.asarray(p)
    if p.shape[0] != n:
        raise SizeMismatchError(f"expected {n} vectors, got {p.shape[0]}")
    return np.cumsum(p[::-1], axis=0)[::-1]


def zeta_from_z(z):
    """``zeta_0 = z_1``, ``zeta_j = z_{j+1} - z_j``."""
    z = np.asarray(z)
    out = np.empty_like(z)
    out[0] = z[0]
    out[1:] = z[1:] - z[:-1]
    return out


def z_from_zeta(zeta):
    """``z_j = sum_{k < j} zeta_k``."""
    return np.cumsum(np.asarray(zeta), axis=0)


def chi_matrix(n: int) -> np.ndarray:
    M = np.zeros((n, n))
    for k in range(n - 1):
        M[k, k] = 1.0
        M[k, k + 1] = -1.0
    M[n - 1, n - 1] = 1.0
    return M


# --- two-point functional on a shifted plane -------------------------------

def gaussian_testfn(z0, x1, x2, x3):
    """``exp(-(z0^2 + |x|^2)/2)``, entire in ``z0``."""
    return np.exp(-0.5 * (z0 * z0 + x1 * x1 + x2 * x2 + x3 * x3))


@dataclass(frozen=True)
class Quad4Config:
    """Light-cone product rule for the relative-variable integral.

    Panels in ``u = x0 - r`` and ``v = x0 + r`` are graded geometrically
    towards the cone (``u = 0`` or ``v = 0``) from ``first_panel`` times the
    contour shift up to ``extent``.
    """

    nodes: int = 8
    first_panel: float = 0.5
    max_panel: float = 1.0
    extent: float = 12.0
    angular_nodes: int = 6

    def breakpoints(self, shift: float) -> np.ndarray:
        width = self.first_panel * shift
        edges = [0.0]
        while edges[-1] < self.extent:
            edges.append(min(self.extent, edges[-1] + width))
            width = min(2.0 * width, self.max_panel)
        pos = np.array(edges)
        return np.concatenate([-pos[:0:-1], pos])


def _axis_rule(bp: np.ndarray, nodes: int):
    t, w = np.polynomial.legendre.leggauss(nodes)
    a, b = bp[:-1, None], bp[1:, None]
    x = 0.5 * (a + b) + 0.5 * (b - a) * t
    wt = 0.5 * (b - a) * w
    return x.ravel(), wt.ravel()


def _angular_average(testfn, z0, r, n_ang):
    """``(4 pi)^-1 int f(z0, r n) dOmega`` with a Gauss x trapezoid rule."""
    ct, wct = np.polynomial.legendre.leggauss(n_ang)
    phi = np.arange(2 * n_ang) * (math.pi / n_ang)
    st = np.sqrt(1.0 - ct * ct)
    nx = (st[:, None] * np.cos(phi)[None, :]).ravel()
    ny = (st[:, None] * np.sin(phi)[None, :]).ravel()
    nz = np.repeat(ct, phi.size)
    wts = np.repeat(wct, phi.size) / (2.0 * phi.size)
    vals = testfn(z0[..., None], r[..., None] * nx, r[..., None] * ny, r[..., None] * nz)
    # test functions that ignore some arguments broadcast short
    vals = np.broadcast_to(vals, z0.shape + (nx.size,))
    return vals @ wts


def plane_margin(l: float, m: float, shift: float) -> float:
    """``1 - 2 l^2 sup_x |D(x0 - i shift, x)|``; the sup sits at ``x = 0``."""
    if l == 0:
        return 1.0
    return 1.0 - 2.0 * l * l * abs(complex(prop.d_minus_decomposed_array(m, -1j * shift, 0.0)))


def apply_functional_2pt(l: float, m: float, r, testfn: Callable | None = None,
                         contour_shift: float = 0.5, q4: Quad4Config = Quad4Config()) -> complex:
    """``int <rho_1 rho_2>(zeta) f(zeta) d^4x`` over ``zeta = x - i shift e_0``.

    The integrand's scalar factor depends on ``(zeta0, |x|)`` only, so the
    test function is averaged over spatial directions and the remaining
    two-dimensional integral is done in light-cone coordinates.
    """
    r = _charges(r)
    if len(r) != 2:
        raise SizeMismatchError("two charges required")
    if contour_shift <= 0:
        raise MarginError("contour shift must be positive")
    testfn = testfn or gaussian_testfn
    margin = plane_margin(l, m, contour_shift)
    if margin <= 0:
        raise MarginError(f"holomorphy margin {margin:.4g} is not positive at shift {contour_shift}")

    bp = q4.breakpoints(contour_shift)
    u, wu = _axis_rule(bp, q4.nodes)
    U, V = np.meshgrid(u, u, indexing="ij")
    W = np.outer(wu, wu) * 0.5
    x0 = 0.5 * (U + V)
    rr = 0.5 * (V - U)
    z0 = x0 - 1j * contour_shift
    fbar = _angular_average(testfn, z0, np.abs(rr), q4.angular_nodes)
    if l == 0:
        F = np.ones_like(z0)
    else:
        D = prop.d_minus_decomposed_array(m, z0, np.abs(rr), floor=0.0)
        a = 2.0 * l * l * phase_h(r[0]) * phase_h(r[1]) * D
        # |a| < 1 on the whole plane, so the principal root is the continued one
        F = (1.0 - a * a) ** -0.5
    # r ranges over R; the even integrand is halved
    return complex(0.5 * np.sum(W * 4.0 * math.pi * rr * rr * F * fbar))
