"""Complex-argument scalar two-point function and light-cone geometry.

Natural units (c = hbar = 1), metric signature (+, -, -, -).  The two-point
function of a free scalar field of mass ``m`` is evaluated at complex time
``z0`` with ``Im z0 <= 0``; ``Im z0 < 0`` is the damped region in which the
momentum integral converges absolutely.

Two independent representations are provided:

* :func:`d_minus` integrates the radial momentum form
  ``(8 pi^2)^-1 int_0^inf (p/w) exp(-i w z0) 2 sin(p r)/r dp`` with composite
  Gauss-Legendre panels and an analytic tail cutoff.
* :func:`d_minus_decomposed` uses the pole terms plus the bounded auxiliary
  function :func:`g_m`, which stays finite on the real axis away from the
  light cone and therefore reaches spacelike boundary values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaincc, gamma as gamma_fn, spherical_jn

from .errors import ConvergenceError, DomainError, SingularityError

FOUR_PI_SQ = 4.0 * math.pi**2
# normalisation of the radial integral, [2 (2 pi)^2]^-1
RADIAL_NORM = 1.0 / (2.0 * FOUR_PI_SQ)
G_M_BOUND = math.sqrt(2.0) * math.pi / 4.0
SMALL_RADIUS = 1e-8
SINGULARITY_FLOOR = 1e-6
RICHARDSON_EPSILONS = (1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class ComplexFourVector:
    z0: complex
    z1: complex = 0.0
    z2: complex = 0.0
    z3: complex = 0.0

    @classmethod
    def of(cls, v) -> "ComplexFourVector":
        if isinstance(v, cls):
            return v
        comps = [complex(c) for c in v]
        if len(comps) != 4:
            raise ValueError(f"four components required, got {len(comps)}")
        return cls(*comps)

    @classmethod
    def damped(cls, x, eps: float) -> "ComplexFourVector":
        """Real point ``x`` with time moved to ``x0 - i eps``."""
        x = [float(c) for c in x]
        return cls(x[0] - 1j * eps, x[1], x[2], x[3])

    def components(self) -> np.ndarray:
        return np.array([self.z0, self.z1, self.z2, self.z3], dtype=complex)

    @property
    def spatial(self) -> np.ndarray:
        return np.array([self.z1, self.z2, self.z3], dtype=complex)

    def minkowski_sq(self) -> complex:
        return self.z0**2 - self.z1**2 - self.z2**2 - self.z3**2

    def has_real_space(self) -> bool:
        return all(c.imag == 0.0 for c in (self.z1, self.z2, self.z3))

    def spatial_norm(self) -> float:
        """Euclidean norm of the (real) spatial part."""
        if not self.has_real_space():
            raise DomainError("spatial components must be real")
        return math.sqrt(self.z1.real**2 + self.z2.real**2 + self.z3.real**2)

    def real(self) -> np.ndarray:
        return self.components().real

    def __add__(self, other):
        return ComplexFourVector(*(self.components() + ComplexFourVector.of(other).components()))

    def __sub__(self, other):
        return ComplexFourVector(*(self.components() - ComplexFourVector.of(other).components()))

    def __neg__(self):
        return ComplexFourVector(*(-self.components()))


@dataclass(frozen=True)
class QuadratureConfig:
    epsilon: float = 0.5
    cutoff: float | None = None
    nodes: int = 16
    rel_tol: float = 1e-10
    extrapolation_steps: int = 2
    max_refine: int = 4

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.nodes < 2:
            raise ValueError("nodes must be at least 2")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.cutoff is not None and self.cutoff <= 0:
            raise ValueError("cutoff must be positive")


DEFAULT_QUAD = QuadratureConfig()


def _check_mass(m: float) -> float:
    m = float(m)
    if m < 0 or not math.isfinite(m):
        raise DomainError(f"mass must be finite and non-negative, got {m}")
    return m


@lru_cache(maxsize=None)
def _gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    # mapped to [0, 1]
    return 0.5 * (x + 1.0), 0.5 * w


def composite_gauss_legendre(a: float, b: float, n_panels: int, nodes: int):
    """Nodes and weights of ``n_panels`` equal Gauss-Legendre panels on [a, b]."""
    t, w = _gauss_legendre(nodes)
    edges = np.linspace(a, b, n_panels + 1)
    h = np.diff(edges)
    x = (edges[:-1, None] + h[:, None] * t[None, :]).ravel()
    wt = (h[:, None] * w[None, :]).ravel()
    return x, wt


def _poly_exp_tail(eps: float, degree: int, start: float) -> float:
    """``int_start^inf p^degree exp(-eps p) dp``."""
    k = degree + 1
    return gammaincc(k, eps * start) * gamma_fn(k) / eps**k


def tail_cutoff(eps: float, degree: int, tol: float) -> float:
    """Smallest cutoff (to a factor 1.1) with analytic tail below ``tol``."""
    lo = max(1.0, math.log(1.0 / (eps * tol)) / eps) if eps * tol < 1 else 1.0
    cut = lo
    while _poly_exp_tail(eps, degree, cut) > tol:
        cut *= 1.1
    return cut


def _radial_setup(m: float, z: ComplexFourVector, q: QuadratureConfig, degree: int):
    if not z.has_real_space():
        raise DomainError("d_minus requires real spatial components")
    z0 = complex(z.z0)
    eps = -z0.imag
    if eps <= 0:
        raise DomainError(f"d_minus requires Im z0 < 0, got {z0.imag}")
    r = z.spatial_norm()
    # integrand magnitude is bounded by 2 p^degree exp(-eps p) (times 1 + m
    # for the gradient), measured against the scale 2/eps^2 of the r = 0 value
    scale = 2.0 / eps**2
    tail_tol = q.rel_tol * 1e-3 * scale / (2.0 * (1.0 + m))
    cutoff = q.cutoff if q.cutoff is not None else tail_cutoff(eps, degree, tail_tol)
    freq = abs(z0.real) + r
    width = min(0.5, math.pi / (freq + 1.0))
    return z0, r, eps, scale, cutoff, width


def _refined_quad(integrand, cutoff, width, q, scale, label):
    """Composite GL with a nested low-order check; halves the panel width on failure."""
    floor = 1e-6 * scale * RADIAL_NORM
    for _ in range(q.max_refine + 1):
        n_panels = max(1, int(math.ceil(cutoff / width)))
        p, w = composite_gauss_legendre(0.0, cutoff, n_panels, q.nodes)
        vals = integrand(p)
        fine = RADIAL_NORM * (vals @ w)
        pc, wc = composite_gauss_legendre(0.0, cutoff, n_panels, max(2, q.nodes // 2))
        coarse = RADIAL_NORM * (integrand(pc) @ wc)
        err = np.max(np.abs(np.atleast_1d(fine - coarse)))
        if err <= q.rel_tol * (np.max(np.abs(np.atleast_1d(fine))) + floor):
            return fine
        width /= 2.0
    raise ConvergenceError(f"{label}: quadrature did not converge (last error {err:.3e})")


def _sin_over_r(p, r):
    if r < SMALL_RADIUS:
        return 2.0 * p
    return 2.0 * p * np.sinc(p * r / math.pi)


def d_minus(m: float, z, q: QuadratureConfig = DEFAULT_QUAD) -> complex:
    """Two-point function ``D_m^(-)(z)`` by direct radial quadrature."""
    m = _check_mass(m)
    z = ComplexFourVector.of(z)
    z0, r, eps, scale, cutoff, width = _radial_setup(m, z, q, degree=1)

    def integrand(p):
        w = np.sqrt(p * p + m * m)
        ratio = np.ones_like(p) if m == 0 else p / w
        return ratio * np.exp(-1j * w * z0) * _sin_over_r(p, r)

    return complex(_refined_quad(integrand, cutoff, width, q, scale, "d_minus"))


def d_minus_grad(m: float, z, q: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    """Gradient ``dD/dz^mu`` (lower-index derivative) as a complex 4-vector.

    Obtained by differentiating the radial integrand: the time derivative
    brings down ``-i w``, the radial derivative of ``sin(p r)/r`` is
    ``-p^2 j1(p r)``.
    """
    m = _check_mass(m)
    z = ComplexFourVector.of(z)
    z0, r, eps, scale, cutoff, width = _radial_setup(m, z, q, degree=2)
    scale = scale * (1.0 + m + 1.0 / eps)

    def integrand(p):
        w = np.sqrt(p * p + m * m)
        ratio = np.ones_like(p) if m == 0 else p / w
        phase = ratio * np.exp(-1j * w * z0)
        dt = phase * (-1j * w) * _sin_over_r(p, r)
        if r < SMALL_RADIUS:
            dr = np.zeros_like(dt)
        else:
            dr = phase * (-2.0 * p * p * spherical_jn(1, p * r))
        return np.stack([dt, dr])

    d0, dr = _refined_quad(integrand, cutoff, width, q, scale, "d_minus_grad")
    grad = np.zeros(4, dtype=complex)
    grad[0] = d0
    if r >= SMALL_RADIUS:
        grad[1:] = dr * z.spatial.real / r
    return grad


# --- auxiliary function g_m -------------------------------------------------

_SEG_REAL = composite_gauss_legendre(0.0, 1.0, 48, 16)
_SEG_VERT = composite_gauss_legendre(0.0, 1.0, 8, 16)
_SEG_TAIL = composite_gauss_legendre(0.0, 8.0, 16, 16)
_S0_CAP = 36.0


def _g_m_path(m: float, z: np.ndarray, x: np.ndarray, partials: bool = False) -> np.ndarray:
    """Vectorised ``g_m`` via the substitution ``p = m sinh u``.

    In ``u`` the integrand is ``exp(-u - i m (z cosh u + x sinh u))``, an
    entire function.  The path runs along the real axis to ``s0`` (where the
    growing phase ``m w e^u / 2``, ``w = z + x``, reaches unit size), drops
    vertically to ``Im u = -theta`` and continues horizontally, where
    ``theta = arg(w) + pi/2`` turns that phase into pure exponential decay.
    """
    z = np.asarray(z, dtype=complex)
    x = np.asarray(x, dtype=float)
    z, x = np.broadcast_arrays(z, x)
    w = z + x
    zmx = z - x
    ang = np.angle(w)
    ang = np.where(ang > 0, ang - 2.0 * math.pi, ang)
    theta = ang + 0.5 * math.pi
    aw = np.abs(w)
    with np.errstate(divide="ignore"):
        s0 = np.clip(np.log(2.0 / (m * aw)), 0.0, _S0_CAP)

    def f(u):
        eu = np.exp(u)
        emu = 1.0 / eu
        base = emu * np.exp(-0.5j * m * (w[..., None] * eu + zmx[..., None] * emu))
        if not partials:
            return base[None]
        # d/dz and d/dx of the exponent: -i m cosh u and -i m sinh u
        return np.stack([base, -0.5j * m * (eu + emu) * base, -0.5j * m * (eu - emu) * base])

    t, wt = _SEG_REAL
    u = s0[..., None] * t
    total = (f(u) @ wt) * s0
    t, wt = _SEG_VERT
    u = s0[..., None] - 1j * theta[..., None] * t
    total = total + (f(u) @ wt) * (-1j * theta)
    t, wt = _SEG_TAIL
    u = (s0 - 1j * theta)[..., None] + t
    total = total + f(u) @ wt
    return total if partials else total[0]


def g_m_array(m: float, z, x, chunk: int = 2048, partials: bool = False) -> np.ndarray:
    m = _check_mass(m)
    z = np.asarray(z, dtype=complex)
    x = np.asarray(x, dtype=float)
    z, x = np.broadcast_arrays(z, x)
    if np.any(z.imag > 0):
        raise DomainError("g_m requires Im z <= 0")
    k = 3 if partials else 1
    if m == 0:
        out = np.zeros((k,) + z.shape, dtype=complex)
        return out if partials else out[0]
    zf, xf = z.ravel(), x.ravel()
    out = np.empty((k, zf.size), dtype=complex)
    for i in range(0, zf.size, chunk):
        res = _g_m_path(m, zf[i:i + chunk], xf[i:i + chunk], partials)
        out[:, i:i + chunk] = res if partials else res[None]
    out = out.reshape((k,) + z.shape)
    return out if partials else out[0]


def g_m(m: float, z: complex, x: float, q: QuadratureConfig = DEFAULT_QUAD) -> complex:
    """Auxiliary function ``int_0^inf e^{-i w z} e^{-i p x} m/(p^2+m^2+p w) dp``.

    Bounded by ``g_m(0, 0) = 1`` for ``Im z <= 0`` and real ``x``.
    """
    z = complex(z)
    if z.imag > 0:
        raise DomainError(f"g_m requires Im z <= 0, got {z.imag}")
    return complex(g_m_array(m, z, float(x)))


def d_minus_decomposed_array(m: float, z0, r, floor: float = SINGULARITY_FLOOR) -> np.ndarray:
    """Pole-plus-``g_m`` form of ``D_m^(-)`` on arrays of ``(z0, |x|)``."""
    m = _check_mass(m)
    z0 = np.asarray(z0, dtype=complex)
    r = np.asarray(r, dtype=float)
    z0, r = np.broadcast_arrays(z0, r)
    if np.any(z0.imag > 0):
        raise DomainError("d_minus_decomposed requires Im z0 <= 0")
    dm = z0 - r
    dp = z0 + r
    if np.any(np.minimum(np.abs(dm), np.abs(dp)) < floor):
        raise SingularityError("|z0 -+ |x|| below singularity floor")
    pole = -np.exp(-1j * m * z0) / (FOUR_PI_SQ * dm * dp)
    if m == 0:
        return pole
    g_minus = g_m_array(m, z0, -r)
    g_plus = g_m_array(m, z0, r)
    return pole - 1j * m * RADIAL_NORM * (g_minus / dm + g_plus / dp)


def d_minus_decomposed(m: float, z, q: QuadratureConfig = DEFAULT_QUAD,
                       floor: float = SINGULARITY_FLOOR) -> complex:
    """``D_m^(-)`` from the pole term and two ``g_m`` fractions.

    Defined for ``Im z0 <= 0`` away from the light cone, including real
    spacelike points.
    """
    z = ComplexFourVector.of(z)
    r = z.spatial_norm()
    return complex(d_minus_decomposed_array(m, complex(z.z0), r, floor))


def d_minus_grad_decomposed_array(m: float, z0, r, floor: float = SINGULARITY_FLOOR):
    """``(dD/dz0, dD/dr)`` of the decomposed form, with ``g_m`` partials on the same path."""
    m = _check_mass(m)
    z0 = np.asarray(z0, dtype=complex)
    r = np.asarray(r, dtype=float)
    z0, r = np.broadcast_arrays(z0, r)
    if np.any(z0.imag > 0):
        raise DomainError("requires Im z0 <= 0")
    dm = z0 - r
    dp = z0 + r
    if np.any(np.minimum(np.abs(dm), np.abs(dp)) < floor):
        raise SingularityError("|z0 -+ |x|| below singularity floor")
    e = np.exp(-1j * m * z0)
    den = dm * dp
    d_z0 = e * (1j * m * den + 2.0 * z0) / (FOUR_PI_SQ * den * den)
    d_r = -e * 2.0 * r / (FOUR_PI_SQ * den * den)
    if m > 0:
        gm, gm_z, gm_x = g_m_array(m, z0, -r, partials=True)
        gp, gp_z, gp_x = g_m_array(m, z0, r, partials=True)
        c = -1j * m * RADIAL_NORM
        d_z0 = d_z0 + c * ((gm_z * dm - gm) / dm**2 + (gp_z * dp - gp) / dp**2)
        d_r = d_r + c * ((-gm_x * dm + gm) / dm**2 + (gp_x * dp - gp) / dp**2)
    return d_z0, d_r


def d_minus_grad_decomposed(m: float, z, floor: float = SINGULARITY_FLOOR) -> np.ndarray:
    """Gradient ``dD/dz^mu`` from the decomposed form; valid for ``Im z0 <= 0``."""
    z = ComplexFourVector.of(z)
    r = z.spatial_norm()
    d_z0, d_r = d_minus_grad_decomposed_array(m, complex(z.z0), r, floor)
    grad = np.zeros(4, dtype=complex)
    grad[0] = complex(d_z0)
    if r >= SMALL_RADIUS:
        grad[1:] = complex(d_r) * z.spatial.real / r
    return grad


def richardson_to_zero(values, steps, order: int = 2) -> tuple[complex, float]:
    """Polynomial extrapolation of ``values[k] = F(steps[k])`` to step 0.

    Uses the first ``order + 1`` samples (Neville).  The error estimate is the
    change from the order-``order - 1`` extrapolant.
    """
    if order < 1 or len(values) < order + 1:
        raise ValueError("need order + 1 samples")
    h = np.asarray(steps[: order + 1], dtype=float)
    v = np.asarray(values[: order + 1], dtype=complex)

    def neville(k):
        p = v[: k + 1].copy()
        for lvl in range(1, k + 1):
            for i in range(k + 1 - lvl):
                j = i + lvl
                p[i] = (h[j] * p[i] - h[i] * p[i + 1]) / (h[j] - h[i])
        return p[0]

    best = neville(order)
    lower = neville(order - 1)
    return complex(best), float(abs(best - lower))


def boundary_value(m: float, x, order: int = 2, epsilons=RICHARDSON_EPSILONS,
                   floor: float = SINGULARITY_FLOOR) -> tuple[complex, float]:
    """``lim_{eps -> 0} D_m^(-)(x0 - i eps, x)`` at a real point by extrapolation."""
    x = np.asarray([float(c) for c in x])
    r = float(np.linalg.norm(x[1:]))
    eps = np.asarray(epsilons[: order + 1], dtype=float)
    vals = d_minus_decomposed_array(m, x[0] - 1j * eps, np.full(eps.shape, r), floor)
    return richardson_to_zero(vals, eps, order)


def boundary_grad(m: float, x, order: int = 2, epsilons=RICHARDSON_EPSILONS,
                  floor: float = SINGULARITY_FLOOR) -> tuple[np.ndarray, float]:
    """Extrapolated ``eps -> 0`` gradient at a real point, with the largest error estimate."""
    x = np.asarray([float(c) for c in x])
    eps = epsilons[: order + 1]
    grads = [d_minus_grad_decomposed(m, ComplexFourVector.damped(x, e), floor) for e in eps]
    out = np.zeros(4, dtype=complex)
    err = 0.0
    for mu in range(4):
        out[mu], e_mu = richardson_to_zero([g[mu] for g in grads], eps, order)
        err = max(err, e_mu)
    return out, err


# --- fundamental length and light-cone geometry ----------------------------

def ell_fundamental(m: float, l: float) -> float:
    """Threshold length ``l_m(l)`` above which ``2 l^2 |D| < 1`` is guaranteed."""
    m = _check_mass(m)
    l = float(l)
    if l < 0:
        raise DomainError("l must be non-negative")
    return (l * l * m * math.sqrt(2.0) / 8.0
            + l * math.sqrt(2.0 + 2.0 * (m / 8.0) ** 2 * l * l)) / (2.0 * math.pi)


def dist_to_lightcone(x) -> float:
    """Euclidean distance in R^4 from ``x`` to the closed cone ``|x0| >= |x|``."""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x[1:]))
    return max(0.0, (r - abs(float(x[0]))) / math.sqrt(2.0))


def epsilon_deform(ell: float, x) -> float:
    """Imaginary-time deformation that is ``ell`` near the cone and 0 far away."""
    if ell <= 0:
        raise DomainError("ell must be positive")
    d = dist_to_lightcone(x)
    if d <= ell / math.sqrt(2.0):
        return float(ell)
    if d <= ell:
        return math.sqrt(max(0.0, 2.0 * ell * ell - 2.0 * d * d))
    return 0.0


def light_cone_a(z0: complex, r: float) -> float:
    """``a = min_pm |z0 pm |x||``."""
    return min(abs(z0 - r), abs(z0 + r))


def bound_estimate(kind: str, m: float, param: float) -> float:
    """Upper bounds on ``|D_m^(-)|``.

    ``"epsilon-form"``: ``(2 pi eps)^-2`` with ``param = eps``.
    ``"a-form"``: ``(2 pi)^-2 (1/a^2 + m sqrt(2) pi / (4 a))`` with ``param = a``.
    """
    m = _check_mass(m)
    if param <= 0:
        raise DomainError("param must be positive")
    if kind == "epsilon-form":
        return (2.0 * math.pi * param) ** -2
    if kind == "a-form":
        return (1.0 / param**2 + m * G_M_BOUND / param) / FOUR_PI_SQ
    raise ValueError(f"unknown bound kind {kind!r}")
