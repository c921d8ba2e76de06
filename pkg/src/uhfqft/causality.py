"""Numerical checks of extended causality.

Boundary values on the real axis are obtained by extrapolating the
decomposed two-point function from ``x0 - i eps`` to ``eps = 0``.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import propagator as prop
from .diracfree import DIRAC, GammaBasis, spinor_from_scalar
from .errors import DomainError, MarginError, PreconditionError
from .gaussmodel import Quad4Config, apply_functional_2pt, det_inv_sqrt
from .propagator import RICHARDSON_EPSILONS

JOST_TOL = 1e-4
ANTISYM_TOL = 1e-3
RESIDUAL_FLOOR = 1e-300


def _real4(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.shape != (4,):
        raise DomainError("a real 4-vector is required")
    if np.iscomplexobj(arr) and np.any(arr.imag != 0):
        raise DomainError("point must be real")
    return arr.real.astype(float)


def is_spacelike(x) -> bool:
    x = _real4(x)
    return float(x[0] ** 2 - x[1:] @ x[1:]) < 0


def _require_spacelike(x):
    if not is_spacelike(x):
        raise DomainError(f"point {tuple(x)} is not spacelike")


class JostResult(NamedTuple):
    value: complex
    reflected: complex
    rel_diff: float


def jost_symmetry(m: float, zeta, order: int = 2, epsilons=RICHARDSON_EPSILONS) -> JostResult:
    """Boundary values ``D(zeta)``, ``D(-zeta)`` at a real spacelike point."""
    zeta = _real4(zeta)
    _require_spacelike(zeta)
    a, _ = prop.boundary_value(m, zeta, order, epsilons)
    b, _ = prop.boundary_value(m, -zeta, order, epsilons)
    return JostResult(a, b, abs(a - b) / max(abs(a), abs(b), RESIDUAL_FLOOR))


class AntisymResult(NamedTuple):
    residual: float
    value: complex
    swapped: complex
    extrapolation_err: float


def _boundary_spinor(M, x, sign, basis, order, epsilons):
    D, e1 = prop.boundary_value(M, x, order, epsilons)
    grad, e2 = prop.boundary_grad(M, x, order, epsilons)
    return spinor_from_scalar(M, D, grad, basis, sign), max(e1, e2)


def _boundary_rho2(l, m, x, order, epsilons):
    if l == 0:
        return 1.0 + 0j, 0.0
    D, err = prop.boundary_value(m, x, order, epsilons)
    # charges (-1, +1) in either order: h_{-1} h_{+1} = 1
    a = 2.0 * l * l * D
    return det_inv_sqrt(np.array([[1.0, a], [a, 1.0]])), err


def antisym_detail(l: float, m: float, M: float, zeta, labels=(0, 0), order: int = 2,
                   epsilons=RICHARDSON_EPSILONS, basis: GammaBasis = DIRAC,
                   require_spacelike: bool = True) -> AntisymResult:
    """Compare ``<psi_a(x) psibar_b(y)>`` with ``-<psibar_b(y) psi_a(x)>``, ``x - y = zeta``.

    ``labels`` are the spinor indices ``(a, b)``.  Both sides are boundary
    values of the full two-point model.  ``require_spacelike=False`` permits
    the timelike contrast case.
    """
    zeta = _real4(zeta)
    if require_spacelike:
        _require_spacelike(zeta)
    a_idx, b_idx = labels
    S, e1 = _boundary_spinor(M, zeta, +1, basis, order, epsilons)
    Sb, e2 = _boundary_spinor(M, -zeta, -1, basis, order, epsilons)
    r1, e3 = _boundary_rho2(l, m, zeta, order, epsilons)
    r2, e4 = _boundary_rho2(l, m, -zeta, order, epsilons)
    w = complex(S[a_idx, b_idx] * r1)
    ws = complex(Sb[a_idx, b_idx] * r2)
    # relative to the larger spinor entry so that vanishing entries stay finite
    scale = max(abs(w), float(np.abs(S).max() * abs(r1)), RESIDUAL_FLOOR)
    return AntisymResult(abs(w + ws) / scale, w, ws, max(e1, e2, e3, e4))


def antisym_check_2pt(l: float, m: float, M: float, zeta, labels=(0, 0), order: int = 2,
                      epsilons=RICHARDSON_EPSILONS, basis: GammaBasis = DIRAC) -> float:
    """Relative residual of spacelike antisymmetry for the fermionic two-point model."""
    return antisym_detail(l, m, M, zeta, labels, order, epsilons, basis).residual


# --- carrier margins --------------------------------------------------------

def ell_coupling(l: float) -> float:
    """``l / (sqrt(2) pi)``."""
    return l / (math.sqrt(2.0) * math.pi)


class CarrierReport(NamedTuple):
    margins: np.ndarray
    epsilons: np.ndarray
    min_margin: float
    passed: bool


def carrier_margin(l: float, m: float, ell_pp: float, grid) -> CarrierReport:
    """``1 - 2 l^2 |D(x0 - i eps_{ell''}(x), x)|`` at every grid point."""
    if m * l >= 2:
        raise PreconditionError(f"requires m l < 2, got {m * l}")
    if l > 0 and ell_pp <= ell_coupling(l):
        raise PreconditionError(f"ell'' = {ell_pp} must exceed {ell_coupling(l)}")
    if ell_pp <= 0:
        raise PreconditionError("ell'' must be positive")
    pts = np.atleast_2d(np.asarray(grid, dtype=float))
    eps = np.array([prop.epsilon_deform(ell_pp, x) for x in pts])
    if l == 0:
        margins = np.ones(len(pts))
    else:
        r = np.linalg.norm(pts[:, 1:], axis=1)
        D = prop.d_minus_decomposed_array(m, pts[:, 0] - 1j * eps, r, floor=0.0)
        margins = 1.0 - 2.0 * l * l * np.abs(D)
    lo = float(margins.min()) if len(margins) else 1.0
    return CarrierReport(margins, eps, lo, bool(np.all(margins > 0)))


def carrier_grid(ell_pp: float, n: int, seed: int = 0, spread: float = 3.0) -> np.ndarray:
    """Random points split evenly across the three deformation regimes.

    Thirds: inside the cone or within ``ell''/sqrt 2`` of it; distance in
    ``[ell''/sqrt 2, ell'']``; distance in ``[ell'', spread * ell'']``.
    """
    rng = np.random.default_rng(seed)
    bands = [(0.0, ell_pp / math.sqrt(2.0)), (ell_pp / math.sqrt(2.0), ell_pp),
             (ell_pp, spread * ell_pp)]
    out = []
    for k in range(n):
        lo, hi = bands[k % 3]
        d = rng.uniform(lo, hi)
        x0 = rng.uniform(-spread, spread)
        if k % 6 == 0:
            # strictly timelike sample, distance 0
            r = abs(x0) * rng.uniform(0.0, 1.0)
        else:
            r = abs(x0) + math.sqrt(2.0) * d
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        out.append(np.concatenate([[x0], r * direction]))
    return np.array(out)


# --- contour deformation ----------------------------------------------------

def deform_invariance(l: float, m: float, r, testfn: Callable | None = None,
                      shifts: Sequence[float] = (0.5, 1.0), q4: Quad4Config = Quad4Config()) -> float:
    """Relative change of the smeared two-point functional between two contours."""
    s1, s2 = (float(s) for s in shifts)
    if s1 <= 0 or s2 <= 0:
        raise MarginError("shifts must be positive")
    v1 = apply_functional_2pt(l, m, r, testfn, s1, q4)
    if s1 == s2:
        return 0.0
    v2 = apply_functional_2pt(l, m, r, testfn, s2, q4)
    return abs(v1 - v2) / max(abs(v1), abs(v2), RESIDUAL_FLOOR)
