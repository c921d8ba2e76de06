"""Check registry shared by the command-line harness and the acceptance tests.

Every check returns :class:`CheckReport` records.  Three pass rules occur:

* tolerance: ``|observed - expected| <= tolerance``;
* bound: ``observed <= expected`` (``tolerance`` is ``None``);
* verdict: ``observed == expected`` for string-valued outcomes.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import causality as caus
from . import diracfree as dirac
from . import gaussmodel as gm
from . import localize1d as loc
from . import propagator as prop
from . import wickcomb as wc
from .errors import UHFError
from .propagator import ComplexFourVector, QuadratureConfig


@dataclass
class Settings:
    mass: float = 1.0
    dirac_mass: float = 1.0
    coupling_l: float = 0.5
    trunc: int | None = None
    quad_nodes: int = 16
    quad_cutoff: float | None = None
    epsilon: float = 0.5
    tol: float | None = None
    grid: int | None = None
    nmax: int = 60
    a: list = field(default_factory=lambda: [1.0, 2.0])
    seed: int = 0

    def quad(self) -> QuadratureConfig:
        return QuadratureConfig(nodes=self.quad_nodes, cutoff=self.quad_cutoff)

    def rng(self, salt: int) -> np.random.Generator:
        # independent deterministic stream per check family
        return np.random.default_rng([self.seed, salt])

    def grid_or(self, default: int) -> int:
        return default if self.grid is None else self.grid

    def tol_or(self, default: float) -> float:
        return default if self.tol is None else self.tol


def _jsonable(v):
    # strict JSON has no NaN or infinity
    if isinstance(v, (float, np.floating)) and not math.isfinite(v):
        return None
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


@dataclass
class CheckReport:
    check: str
    params: dict
    observed: object
    expected: object
    tolerance: float | None
    passed: bool
    runtime_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "params": _jsonable(self.params),
            "observed": _jsonable(self.observed),
            "expected": _jsonable(self.expected),
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
            "runtime_ms": round(float(self.runtime_ms), 3),
        }

    def sort_key(self):
        return (self.check, json.dumps(_jsonable(self.params), sort_keys=True))


def tolerance_report(check, params, observed, expected, tol, runtime_ms=0.0) -> CheckReport:
    ok = bool(abs(observed - expected) <= tol)
    return CheckReport(check, params, observed, expected, tol, ok, runtime_ms)


def bound_report(check, params, observed, bound, runtime_ms=0.0) -> CheckReport:
    return CheckReport(check, params, observed, bound, None, bool(observed <= bound), runtime_ms)


def _timed(fn: Callable):
    t0 = time.perf_counter()
    out = fn()
    return out, 1e3 * (time.perf_counter() - t0)


def _rel(a, b, floor=1e-300) -> float:
    return abs(a - b) / max(abs(b), floor)


# --- sampling helpers -------------------------------------------------------

def sample_with_light_cone_gap(rng, n: int, a_min: float, a_max: float, r_max: float = 3.0):
    """``(z0, r)`` pairs with ``Im z0 <= 0`` and ``min |z0 -+ r|`` in ``[a_min, a_max]``."""
    out = []
    while len(out) < n:
        a = rng.uniform(a_min, a_max)
        theta = rng.uniform(0.0, math.pi)
        r = rng.uniform(0.0, r_max)
        sign = rng.choice([-1.0, 1.0])
        # put the nearer singular factor at distance exactly a
        z0 = -sign * r + a * complex(math.cos(theta), -math.sin(theta))
        if prop.light_cone_a(z0, r) >= a * (1 - 1e-12):
            out.append((z0, r))
    return out


def spacelike_points(rng, n: int, scale: float = 2.0):
    out = []
    while len(out) < n:
        x = rng.uniform(-scale, scale, 4)
        r = np.linalg.norm(x[1:])
        if r - abs(x[0]) > 0.2:
            out.append(x)
    return out


def shifted_points(rng, n: int, gap: float, spread: float = 1.0):
    """Points with imaginary times ``0, gap, 2 gap, ...`` (pair differences damped)."""
    xs = rng.uniform(-spread, spread, (n, 4))
    return [ComplexFourVector(x[0] + 1j * gap * k, x[1], x[2], x[3]) for k, x in enumerate(xs)]


# --- bounds -----------------------------------------------------------------

def check_bounds(s: Settings) -> list[CheckReport]:
    rng = s.rng(1)
    q = s.quad()
    eps = s.epsilon
    out = []
    bound_eps = prop.bound_estimate("epsilon-form", s.mass, eps)
    for x in rng.uniform(-3.0, 3.0, (s.grid_or(1000), 4)):
        z = ComplexFourVector.damped(x, eps)
        val, ms = _timed(lambda: abs(prop.d_minus(s.mass, z, q)))
        params = {"mass": s.mass, "epsilon": eps, "x": x}
        out.append(bound_report("bounds.epsilon_form", params, val, bound_eps, ms))
        a = prop.light_cone_a(z.z0, z.spatial_norm())
        out.append(bound_report("bounds.a_form", params, val, prop.bound_estimate("a-form", s.mass, a)))
    out.extend(check_ell_estimate(s))
    return out


def check_ell_estimate(s: Settings, n: int = 200) -> list[CheckReport]:
    l, m = s.coupling_l, s.mass
    ell = prop.ell_fundamental(m, l)
    rng = s.rng(2)
    pts = sample_with_light_cone_gap(rng, n, ell * (1 + 1e-3), 3.0 * ell)
    z0 = np.array([p[0] for p in pts])
    r = np.array([p[1] for p in pts])
    vals, ms = _timed(lambda: 2 * l * l * np.abs(prop.d_minus_decomposed_array(m, z0, r, floor=0.0)))
    worst = int(np.argmax(vals))
    params = {"mass": m, "coupling_l": l, "points": n, "ell_m": ell,
              "worst_z0": z0[worst], "worst_r": r[worst]}
    return [CheckReport("bounds.fundamental_length", params, float(vals.max()), 1.0, None,
                        bool(vals.max() < 1.0), ms)]


# --- propagator ---------------------------------------------------------------

def check_propagator(s: Settings) -> list[CheckReport]:
    rng = s.rng(3)
    q = s.quad()
    out = []
    tol = s.tol_or(1e-6)
    for x in rng.uniform(-3.0, 3.0, (s.grid_or(50), 4)):
        z = ComplexFourVector.damped(x, s.epsilon)
        (a, b), ms = _timed(lambda: (prop.d_minus(s.mass, z, q), prop.d_minus_decomposed(s.mass, z, q)))
        params = {"mass": s.mass, "epsilon": s.epsilon, "x": x}
        out.append(tolerance_report("propagator.decomposition", params, _rel(b, a), 0.0, tol, ms))
    out.extend(check_g_bound(s, [s.mass]))
    g0, ms = _timed(lambda: prop.g_m(s.mass, 0j, 0.0))
    out.append(tolerance_report("propagator.g_origin", {"mass": s.mass}, g0, 1.0, 1e-10, ms))
    return out


def check_g_bound(s: Settings, masses, n: int | None = None) -> list[CheckReport]:
    out = []
    n = s.grid_or(50) if n is None else n
    for m in masses:
        rng = s.rng(4)
        z = rng.uniform(-3, 3, n) - 1j * rng.uniform(0, 2, n)
        x = rng.uniform(-3, 3, n)
        vals, ms = _timed(lambda: np.abs(prop.g_m_array(m, z, x)))
        k = int(np.argmax(vals))
        params = {"mass": m, "samples": n, "worst_z": z[k], "worst_x": x[k]}
        out.append(bound_report("propagator.g_bound", params, float(vals.max()),
                                prop.G_M_BOUND + 1e-6, ms))
    return out


# --- jaffe --------------------------------------------------------------------

def degree_vectors(max_points: int = 4, max_total: int = 8):
    for k in range(1, max_points + 1):
        for degs in itertools.product(range(max_total + 1), repeat=k):
            if sum(degs) <= max_total:
                yield degs


def random_pairing(rng, k: int, scale: float = 1.0) -> wc.PairingMatrix:
    vals = scale * (rng.normal(size=k * (k - 1) // 2) + 1j * rng.normal(size=k * (k - 1) // 2))
    return wc.PairingMatrix.from_upper(vals, k)


def jaffe_oracle_error(degs, t: wc.PairingMatrix) -> float:
    """Jaffe sum vs matching enumeration, relative to the absolute-value enumeration."""
    series = [wc.WickSeries.monomial(n) for n in degs]
    jv = wc.jaffe_vev(series, t, sum(degs) // 2)
    ov = wc.monomial_vev_oracle(degs, t)
    scale = wc.monomial_vev_oracle(degs, wc.PairingMatrix(np.abs(t.t)))
    return abs(jv - ov) / max(scale.real, 1e-300) if scale != 0 else abs(jv - ov)


def check_jaffe(s: Settings, max_points: int = 4, max_total: int = 8) -> list[CheckReport]:
    rng = s.rng(5)
    tol = s.tol_or(1e-12)
    out = []
    for degs in degree_vectors(max_points, max_total):
        ts = [random_pairing(rng, len(degs)) for _ in range(s.grid_or(20))]
        err, ms = _timed(lambda: max(jaffe_oracle_error(degs, t) for t in ts))
        out.append(tolerance_report("jaffe.oracle", {"degrees": list(degs), "matrices": len(ts)},
                                    err, 0.0, tol, ms))
    out.extend(check_exp_closed(s))
    return out


def exp_closed_error(g, t: wc.PairingMatrix, trunc: int) -> float:
    series = [wc.WickSeries.exp_linear(gi, trunc) for gi in g]
    return abs(wc.jaffe_vev(series, t, trunc) - wc.exp_vev_closed(g, t))


def check_exp_closed(s: Settings, strength: float = 0.3, trunc: int = 30) -> list[CheckReport]:
    rng = s.rng(6)
    out = []
    for k in (2, 3):
        for _ in range(max(1, s.grid_or(20) // 4)):
            g = rng.normal(size=k) + 1j * rng.normal(size=k)
            t = random_pairing(rng, k)
            total = sum(abs(g[i] * g[j] * t.t[i, j]) for i, j in t.pairs())
            t = wc.PairingMatrix(t.t * (strength / total))
            err, ms = _timed(lambda: exp_closed_error(g, t, trunc))
            out.append(tolerance_report("jaffe.exp_closed", {"points": k, "g": g, "trunc": trunc},
                                        err, 0.0, 1e-10, ms))
    return out


# --- gauss-vev ----------------------------------------------------------------

def determinant_points(rng, l: float, m: float, n: int, max_entry: float = 0.3):
    """Shifted points whose ``|2 l^2 D|`` entries are all at most ``max_entry``."""
    gap = 0.5
    while True:
        pts = shifted_points(rng, n, gap)
        t = gm.pairing_from_points(m, pts)
        if max(2 * l * l * abs(t.t[i, j]) for i, j in t.pairs()) <= max_entry:
            return pts, t
        gap *= 1.25


def check_gauss(s: Settings) -> list[CheckReport]:
    l, m = s.coupling_l, s.mass
    trunc = s.trunc if s.trunc is not None else 40
    rng = s.rng(7)
    out = []
    for n in (2, 3):
        for _ in range(s.grid_or(5)):
            pts, t = determinant_points(rng, l, m, n)
            r = tuple(rng.choice([-1, 1], size=n))
            (ser, closed), ms = _timed(lambda: (
                gm.rho_vev_series(l, m, pts, r, trunc, pairing=t),
                gm.det_inv_sqrt(gm.a_matrix_from_pairing(l, t, r))))
            params = {"coupling_l": l, "mass": m, "charges": list(r), "trunc": trunc,
                      "points": [p.components() for p in pts]}
            out.append(tolerance_report("gauss.determinant", params, ser, closed, 1e-8, ms))
    out.extend(check_sigma(s))
    out.extend(check_chi(s))
    return out


def check_sigma(s: Settings) -> list[CheckReport]:
    l = s.coupling_l
    est, ms = _timed(lambda: wc.sigma_growth(wc.WickSeries.exp_square(l * l, 64), (20, 60)))
    params = {"coupling_l": l, "window": [20, 60]}
    target_ell = l / (math.sqrt(2) * math.pi)
    return [
        tolerance_report("gauss.sigma_growth", params, est.sigma / (2 * l * l), 1.0, 0.05, ms),
        tolerance_report("gauss.sigma_length", params, est.ell / target_ell, 1.0, 0.05),
    ]


def chi_roundtrip_error(n: int, vals) -> float:
    back = gm.chi_inv(n, gm.chi_map(n, vals))
    return float(np.abs(back - vals).max())


def check_chi(s: Settings) -> list[CheckReport]:
    rng = s.rng(8)
    out = []
    for n in range(1, 7):
        ints = rng.integers(-1000, 1000, (n, 4))
        err_i = chi_roundtrip_error(n, ints)
        out.append(tolerance_report("gauss.chi_roundtrip", {"n": n, "kind": "int"}, err_i, 0.0, 0.0))
        flt = rng.normal(size=(n, 4)) + 1j * rng.normal(size=(n, 4))
        err_f = chi_roundtrip_error(n, flt)
        out.append(tolerance_report("gauss.chi_roundtrip", {"n": n, "kind": "float"}, err_f, 0.0, 1e-14))
    return out


# --- deq ----------------------------------------------------------------------

def deq_points(rng, l: float, m: float, n: int, max_entry: float = 0.2):
    out = []
    while len(out) < n:
        x = rng.uniform(-1.0, 1.0, 4)
        y = rng.uniform(0.3, 1.5)
        zeta = ComplexFourVector(x[0] - 1j * y, x[1], x[2], x[3])
        if 2 * l * l * abs(prop.d_minus(m, zeta)) <= max_entry:
            out.append((zeta, int(rng.integers(0, 4))))
    return out


def check_deq(s: Settings) -> list[CheckReport]:
    l, m = s.coupling_l, s.mass
    trunc = s.trunc if s.trunc is not None else 20
    tol = s.tol_or(1e-6)
    out = []
    for zeta, mu in deq_points(s.rng(9), l, m, s.grid_or(5)):
        (hi, lo), ms = _timed(lambda: (abs(gm.deq_residual(l, m, zeta, mu, trunc)),
                                       abs(gm.deq_residual(l, m, zeta, mu, 5))))
        params = {"coupling_l": l, "mass": m, "zeta": zeta.components(), "mu": mu, "trunc": trunc}
        out.append(bound_report("deq.residual", params, hi, tol, ms))
        # decay factor from trunc 5: lo / hi >= 10, written as hi / lo <= 0.1
        out.append(bound_report("deq.decay", params, hi / max(lo, 1e-300), 0.1))
    return out


# --- causality ----------------------------------------------------------------

def deform_shifts(l: float) -> tuple[float, float]:
    ell_pp = 1.1 * caus.ell_coupling(l)
    return 1.2 * ell_pp, 1.5 * ell_pp


def check_causality(s: Settings, include_deform: bool = True) -> list[CheckReport]:
    l, m, M = s.coupling_l, s.mass, s.dirac_mass
    rng = s.rng(10)
    out = []
    for zeta in spacelike_points(rng, s.grid_or(10)):
        res, ms = _timed(lambda: caus.jost_symmetry(m, zeta))
        out.append(tolerance_report("causality.jost", {"mass": m, "zeta": zeta}, res.rel_diff, 0.0, 1e-4, ms))
    for zeta in spacelike_points(rng, 5):
        ab = tuple(int(v) for v in rng.integers(0, 4, 2))
        res, ms = _timed(lambda: caus.antisym_detail(l, m, M, zeta, ab))
        params = {"coupling_l": l, "mass": m, "dirac_mass": M, "zeta": zeta, "labels": list(ab),
                  "extrapolation_err": res.extrapolation_err}
        out.append(tolerance_report("causality.antisymmetry", params, res.residual, 0.0, 1e-3, ms))
    out.extend(check_carrier(s))
    if include_deform:
        out.extend(check_deform(s))
    return out


def check_carrier(s: Settings, factor: float = 1.1) -> list[CheckReport]:
    l, m = s.coupling_l, s.mass
    if m * l >= 2 or l == 0:
        return []
    ell_pp = factor * caus.ell_coupling(l)
    grid = caus.carrier_grid(ell_pp, 1000, seed=s.seed)
    rep, ms = _timed(lambda: caus.carrier_margin(l, m, ell_pp, grid))
    params = {"coupling_l": l, "mass": m, "ell_pp": ell_pp, "points": len(grid)}
    # min margin must be positive: -min_margin < 0
    return [CheckReport("causality.carrier_margin", params, rep.min_margin, 0.0, None, rep.passed, ms)]


def check_deform(s: Settings) -> list[CheckReport]:
    l, m = s.coupling_l, s.mass
    shifts = deform_shifts(l) if l > 0 else (0.5, 1.0)
    val, ms = _timed(lambda: caus.deform_invariance(l, m, (-1, 1), shifts=shifts))
    params = {"coupling_l": l, "mass": m, "shifts": list(shifts)}
    return [tolerance_report("causality.deform", params, val, 0.0, 1e-3, ms)]


# --- localize -----------------------------------------------------------------

def check_localize(s: Settings, f: loc.StripTestFunction = loc.SECH) -> list[CheckReport]:
    out = []
    for v in loc.localization_report(f, s.a, s.nmax, s.tol_or(loc.CONVERGENCE_TOL)):
        expect_conv = abs(v.a) < f.half_width
        observed = v.verdict
        if observed == "converges" and not v.within_tol:
            observed = "unresolved at nmax"
        expected = "converges" if expect_conv else "diverges"
        params = {"function": f.name, "a": v.a, "nmax": s.nmax, "error": v.error,
                  "max_partial": v.max_partial, "ratio": v.ratio, "half_width": f.half_width,
                  "interpretation": v.interpretation}
        out.append(CheckReport("localize.verdict", params, observed, expected, None, observed == expected))
    return out


# --- dirac --------------------------------------------------------------------

def random_unitary(rng, n: int = 4) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    qm, rm = np.linalg.qr(z)
    return qm * (np.diag(rm) / np.abs(np.diag(rm)))


def check_dirac(s: Settings) -> list[CheckReport]:
    M = s.dirac_mass
    rng = s.rng(11)
    out = []
    for name, basis in (("dirac", dirac.DIRAC),
                        ("unitary_conjugate", dirac.DIRAC.conjugated(random_unitary(rng)))):
        try:
            rep = dirac.gamma_check(basis)
            out.append(tolerance_report("dirac.gamma_check", {"basis": name},
                                        rep.max_anticommutator_error, 0.0, dirac.ALGEBRA_TOL))
        except UHFError as exc:
            out.append(CheckReport("dirac.gamma_check", {"basis": name, "error": str(exc)},
                                   None, 0.0, dirac.ALGEBRA_TOL, False))
    for x in rng.uniform(-2, 2, (s.grid_or(20), 4)):
        z = ComplexFourVector.damped(x, rng.uniform(0.2, 1.0))
        (tr, ref), ms = _timed(lambda: (np.trace(dirac.s_minus(M, z)), 4 * M * prop.d_minus_decomposed(M, z)))
        out.append(tolerance_report("dirac.trace", {"dirac_mass": M, "z": z.components()},
                                    _rel(tr, ref), 0.0, 1e-10, ms))
    labels = [("psi", 0), ("psibar", 1), ("psi", 2), ("psibar", 3)]
    for perm in itertools.permutations(range(4)):
        labs = [labels[i] for i in perm]
        pts = shifted_points(rng, 4, 0.4)
        (det, enum), ms = _timed(lambda: (dirac.dirac_npoint(M, pts, labs),
                                          dirac.dirac_npoint_oracle(M, pts, labs)))
        out.append(tolerance_report("dirac.npoint4", {"labels": labs, "dirac_mass": M},
                                    _rel(det, enum), 0.0, 1e-12, ms))
    out.extend(check_factorization(s, rng))
    return out


def factorization_error(l, m, M, pts, labs) -> float:
    """Joint value vs. independently recomputed factors.

    Dirac part by explicit bijection enumeration; scalar part by the
    eigenvalue product (or the 2x2 closed form).
    """
    joint = dirac.full_model_vev(l, m, M, pts, labs)
    C, sign = dirac.propagator_matrix(M, pts, labs)
    free = sign * dirac.bijection_sum(C)
    r = dirac.charges_from_labels(labs)
    A = gm.build_A(l, m, pts, r)
    if len(pts) == 2:
        scalar = (1.0 - A[0, 1] * A[1, 0]) ** -0.5
    else:
        scalar = gm.det_inv_sqrt_eigen(A)
    return _rel(joint, free * scalar)


def check_factorization(s: Settings, rng) -> list[CheckReport]:
    M, l, m = s.dirac_mass, s.coupling_l, s.mass
    out = []
    cases = [[("psi", 0), ("psibar", 0)], [("psibar", 2), ("psi", 1)],
             [("psi", 0), ("psibar", 1), ("psi", 2), ("psibar", 3)],
             [("psi", 1), ("psi", 3), ("psibar", 0), ("psibar", 2)]]
    for labs in cases:
        pts = shifted_points(rng, len(labs), 0.8)
        err, ms = _timed(lambda: factorization_error(l, m, M, pts, labs))
        out.append(tolerance_report("dirac.factorization", {"labels": labs, "coupling_l": l},
                                    err, 0.0, 1e-12, ms))
    return out


SUBCOMMANDS = {
    "bounds": check_bounds,
    "propagator": check_propagator,
    "jaffe": check_jaffe,
    "gauss-vev": check_gauss,
    "deq": check_deq,
    "causality": check_causality,
    "localize": check_localize,
    "dirac": check_dirac,
}


def run_checks(name: str, s: Settings) -> list[CheckReport]:
    if name == "report-all":
        reports = []
        for fn in SUBCOMMANDS.values():
            reports.extend(fn(s))
    else:
        reports = SUBCOMMANDS[name](s)
    return sorted(reports, key=CheckReport.sort_key)
