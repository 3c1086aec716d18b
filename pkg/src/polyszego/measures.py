"""Weights and measures on the unit circle.

Contains the fixed trigonometric weight ``p(t) = ∏|t - ζ_k|²`` with its derived
analytic polynomial ``P``, probability measures (absolutely continuous density
plus atoms), the catalog of test measures, and the circle integrals built on
:mod:`polyszego.quadrature`: moments and the weighted log-integral
``∫ p log σ'_ac dm``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import mpmath as mp
import numpy as np

from ._numbers import to_mpc, to_pair
from .errors import (
    ConvergenceError,
    DivergenceError,
    UnsupportedMultiplicityError,
    ValidationError,
)
from .quadrature import certify_divergence, integrate_circle, integrate_periodic, resolve_spec

UNIMODULAR_TOL = 1e-12


# ---------------------------------------------------------------------------
# Trigonometric weight
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrigWeight:
    """``p(t) = ∏_k |t - ζ_k|²`` with its Laurent data.

    ``laurent`` maps ``j -> p̂_j`` for ``|j| <= N``; ``analytic_P`` holds the
    coefficients of ``P`` (ascending, ``P(0) = 0``), defined through
    ``t P'(t) = p_1(t) - p_1(0)`` with ``p_1 = 2 P_+ p``; ``a0 = p_1(0) = 2 p̂_0``.
    """

    roots: tuple
    multiplicities: tuple
    laurent: dict
    analytic_P: tuple
    a0: mp.mpf

    @property
    def N(self):
        return len(self.roots)

    def __call__(self, t):
        t = to_mpc(t)
        val = mp.mpf(1)
        for z in self.roots:
            val *= abs(t - z) ** 2
        return val

    def laurent_eval(self, z):
        """The Laurent polynomial ``Σ p̂_j z^j``; equals ``p`` on the circle."""
        z = to_mpc(z)
        return mp.fsum(c * z**j for j, c in self.laurent.items())

    def p1_coefficients(self):
        """Coefficients of ``p_1 = 2 P_+ p`` (degree ``N``)."""
        return tuple(2 * self.laurent.get(j, mp.mpc(0)) for j in range(self.N + 1))

    def P_eval(self, z):
        z = to_mpc(z)
        return mp.fsum(c * z**j for j, c in enumerate(self.analytic_P))

    def min_on_grid(self, points=4096):
        with mp.workprec(max(mp.mp.prec, 64)):
            return min(self(mp.expj(2 * mp.pi * k / points)) for k in range(points))

    def evaluate_np(self, theta):
        t = np.exp(1j * np.asarray(theta, dtype=float))
        out = np.ones_like(theta, dtype=float)
        for z in self.roots:
            out = out * np.abs(t - complex(z)) ** 2
        return out

    def to_json(self, precision_bits=None):
        doc = {"type": "trig_weight", "params": {"roots": [to_pair(z) for z in self.roots]}}
        if precision_bits is not None:
            doc["precision_bits"] = precision_bits
        return doc


def _mul_laurent(a, b):
    out = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, mp.mpc(0)) + x * y
    return out


def laurent_expand(roots, multiplicities=None):
    """Build the :class:`TrigWeight` ``∏|t - ζ_k|²`` for unimodular ``roots``.

    Each factor is ``|t - ζ|² = 2 - ζ̄ t - ζ t^{-1}`` on the circle, so the
    product is expanded coefficient-wise.
    """
    roots = [to_mpc(z) for z in roots]
    if multiplicities is None:
        multiplicities = [1] * len(roots)
    if len(multiplicities) != len(roots):
        raise ValidationError("one multiplicity per root is required", field="multiplicities")
    for k in multiplicities:
        if k != 1:
            raise UnsupportedMultiplicityError(
                f"only simple roots are supported, got multiplicity {k}", field="multiplicities"
            )
    normed = []
    for z in roots:
        if abs(abs(z) - 1) > UNIMODULAR_TOL:
            raise ValidationError(f"root {complex(z)} is not on the unit circle", field="roots")
        normed.append(z / abs(z))
    if len({(round(float(z.real), 12), round(float(z.imag), 12)) for z in normed}) != len(normed):
        raise ValidationError("roots must be distinct", field="roots")

    lau = {0: mp.mpc(1)}
    for z in normed:
        lau = _mul_laurent(lau, {-1: -z, 0: mp.mpc(2), 1: -mp.conj(z)})
    # p is real on T: p̂_{-j} = conj(p̂_j); enforce it exactly
    for j in list(lau):
        if j > 0:
            lau[-j] = mp.conj(lau[j])
    lau[0] = mp.mpc(mp.re(lau[0]))
    N = len(normed)
    P = [mp.mpc(0)] + [2 * lau.get(j, mp.mpc(0)) / j for j in range(1, N + 1)]
    a0 = 2 * mp.re(lau[0])
    return TrigWeight(tuple(normed), tuple(multiplicities), lau, tuple(P), a0)


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingularPoint:
    point: mp.mpc
    kind: str
    exponent: float = 0.0


@dataclass(frozen=True)
class Measure:
    """Probability measure ``σ = w dm + Σ m_j δ_{a_j}`` on the circle.

    ``log_density`` evaluates ``log w`` at full working precision (``mpc`` in,
    ``mpf`` out); ``log_density_np`` is the vectorized float64 twin taking
    angles.  ``w`` already includes the factor ``1 - Σ m_j`` when atoms exist.
    """

    kind: str
    params: dict
    log_density: Callable
    log_density_np: Callable
    singular_points: tuple = ()
    atoms: tuple = ()
    normalization: mp.mpf = field(default_factory=lambda: mp.mpf(1))
    precision_bits: int = 128

    def density(self, t):
        return mp.exp(self.log_density(to_mpc(t)))

    def density_np(self, theta):
        return np.exp(self.log_density_np(theta))

    @property
    def singular_locations(self):
        return tuple(s.point for s in self.singular_points)

    @property
    def atom_mass(self):
        return mp.fsum(m for _, m in self.atoms)

    def to_json(self):
        params = dict(self.params)
        if self.atoms:
            params["atoms"] = [[to_pair(a), float(m)] for a, m in self.atoms]
        return {"type": self.kind, "params": params, "precision_bits": self.precision_bits}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def lebesgue():
    """Normalized arc-length measure ``dm``."""
    return Measure(
        kind="lebesgue",
        params={},
        log_density=lambda t: mp.mpf(0),
        log_density_np=lambda theta: np.zeros_like(np.asarray(theta, dtype=float)),
    )


def bernstein_szego(alphas, spec=None):
    """Bernstein–Szegő measure ``∏ρ_k² / |Φ*_n(t)|² dm`` generated by finitely many ``α``.

    The measure is a probability measure exactly, so the stored normalization
    constant is 1.
    """
    from .szego_core import as_verblunsky, bs_log_density, bs_log_density_np

    seq = as_verblunsky(alphas)
    if len(seq) == 0:
        m = lebesgue()
        return Measure("bernstein_szego", {"alphas": []}, m.log_density, m.log_density_np)
    spec = resolve_spec(spec)
    return Measure(
        kind="bernstein_szego",
        params={"alphas": seq.to_json()},
        log_density=lambda t: bs_log_density(seq, t),
        log_density_np=lambda theta: bs_log_density_np(seq, theta),
        precision_bits=spec.precision_bits,
    )


def ps_exponential(zeta, s, c=1, spec=None):
    """Density proportional to ``exp(-c |t - ζ|^{-s})``, normalized numerically.

    For ``1 <= s < 3`` the measure fails the Szegő condition but satisfies the
    polynomial Szegő condition for ``p = |t - ζ|²``.
    """
    zeta = to_mpc(zeta)
    if abs(abs(zeta) - 1) > UNIMODULAR_TOL:
        raise ValidationError("zeta must lie on the unit circle", field="zeta")
    zeta = zeta / abs(zeta)
    s = float(s)
    c = float(c)
    if not 0 < s < 3:
        raise ValidationError(f"exponent s={s} outside (0, 3)", field="s")
    if c <= 0:
        raise ValidationError("c must be positive", field="c")
    spec = resolve_spec(spec)
    with mp.workprec(spec.precision_bits):
        ms, mc = mp.mpf(s), mp.mpf(c)
        Z = integrate_circle(lambda t: mp.exp(-mc * abs(t - zeta) ** (-ms)), [zeta], spec)
        logZ = mp.log(Z)
    zc, lz = complex(zeta), float(logZ)

    def log_w(t):
        d = abs(t - zeta)
        if d == 0:
            return mp.ninf
        return -mc * d ** (-ms) - logZ

    def log_w_np(theta):
        d = np.abs(np.exp(1j * np.asarray(theta, dtype=float)) - zc)
        with np.errstate(divide="ignore"):
            return -c * d ** (-s) - lz

    return Measure(
        kind="ps_exponential",
        params={"zeta": to_pair(zeta), "s": s, "c": c},
        log_density=log_w,
        log_density_np=log_w_np,
        singular_points=(SingularPoint(zeta, "exp_vanishing", s),),
        normalization=Z,
        precision_bits=spec.precision_bits,
    )


def with_atoms(measure, atoms):
    """Add point masses and rescale the absolutely continuous part to keep mass 1."""
    atoms = tuple((to_mpc(a) / abs(to_mpc(a)), mp.mpf(m)) for a, m in atoms)
    for a, m in atoms:
        if m <= 0:
            raise ValidationError("atom masses must be positive", field="atoms")
        if abs(abs(a) - 1) > UNIMODULAR_TOL:
            raise ValidationError("atoms must lie on the unit circle", field="atoms")
    all_atoms = measure.atoms + atoms
    positions = {(round(float(a.real), 12), round(float(a.imag), 12)) for a, _ in all_atoms}
    if len(positions) != len(all_atoms):
        raise ValidationError("atom positions must be distinct", field="atoms")
    scale = 1 - mp.fsum(m for _, m in atoms) / (1 - measure.atom_mass)
    if scale <= 0:
        raise ValidationError("atom masses must sum to less than 1", field="atoms")
    log_scale = mp.log(scale)
    fscale = float(log_scale)
    base_log, base_np = measure.log_density, measure.log_density_np
    return Measure(
        kind=measure.kind,
        params=measure.params,
        log_density=lambda t: base_log(t) + log_scale,
        log_density_np=lambda theta: base_np(theta) + fscale,
        singular_points=measure.singular_points,
        atoms=all_atoms,
        normalization=measure.normalization,
        precision_bits=measure.precision_bits,
    )


CATALOG = {
    "lebesgue": lambda params, spec: lebesgue(),
    "bernstein_szego": lambda params, spec: bernstein_szego(params.get("alphas", []), spec),
    "ps_exponential": lambda params, spec: ps_exponential(
        params["zeta"], params["s"], params.get("c", 1), spec
    ),
}

_MEASURE_PARAMS = {
    "lebesgue": set(),
    "bernstein_szego": {"alphas"},
    "ps_exponential": {"zeta", "s", "c"},
}


def measure_from_json(doc, spec=None):
    """Inverse of :meth:`Measure.to_json`; validates type and parameter names."""
    if not isinstance(doc, dict) or "type" not in doc:
        raise ValidationError("measure document needs a 'type'", field="measure.type")
    unknown = set(doc) - {"type", "params", "precision_bits"}
    if unknown:
        raise ValidationError(f"unknown measure keys {sorted(unknown)}", field="measure")
    kind = doc["type"]
    if kind not in CATALOG:
        raise ValidationError(f"unknown measure type {kind!r}", field="measure.type")
    params = dict(doc.get("params", {}))
    atoms = params.pop("atoms", [])
    bad = set(params) - _MEASURE_PARAMS[kind]
    if bad:
        raise ValidationError(f"unknown parameters {sorted(bad)} for {kind}", field="measure.params")
    if spec is None and "precision_bits" in doc:
        from .quadrature import QuadratureSpec

        spec = QuadratureSpec(precision_bits=int(doc["precision_bits"]))
    try:
        m = CATALOG[kind](params, spec)
    except KeyError as exc:
        raise ValidationError(f"missing parameter {exc} for {kind}", field="measure.params") from exc
    if atoms:
        m = with_atoms(m, [(a, mass) for a, mass in atoms])
    return m


def weight_from_json(doc):
    if "roots" in doc and "type" not in doc:
        doc = {"type": "trig_weight", "params": {"roots": doc["roots"]}}
    if doc.get("type") != "trig_weight":
        raise ValidationError("weight document must have type 'trig_weight'", field="weight.type")
    params = doc.get("params", {})
    unknown = set(params) - {"roots", "multiplicities"}
    if unknown:
        raise ValidationError(f"unknown weight parameters {sorted(unknown)}", field="weight.params")
    return laurent_expand(params.get("roots", []), params.get("multiplicities"))


# ---------------------------------------------------------------------------
# Integrals against measures
# ---------------------------------------------------------------------------


def moments(measure, n_max, spec=None):
    """Trigonometric moments ``c_k = ∫ t^{-k} dσ`` for ``k = 0..n_max``."""
    spec = resolve_spec(spec)
    n_max = int(n_max)
    # enough panels that each one sees a bounded number of oscillations of t^{-n_max}
    local = spec if spec.base_panels >= n_max // 2 else type(spec)(
        **{**spec.to_dict(), "base_panels": max(spec.base_panels, n_max // 2)}
    )
    with mp.workprec(spec.precision_bits):

        def f(t):
            w = mp.exp(measure.log_density(t))
            tb = mp.conj(t)
            out = [w]
            for _ in range(n_max):
                out.append(out[-1] * tb)
            return out

        if measure.kind == "lebesgue":
            vals = [mp.mpc(1 - measure.atom_mass)] + [mp.mpc(0)] * n_max
        elif not measure.singular_locations:
            # analytic density: equispaced nodes converge geometrically
            def g(t, j, M):
                w = mp.exp(measure.log_density(t))
                out = [w]
                tb = mp.conj(t)
                for _ in range(n_max):
                    out.append(out[-1] * tb)
                return out

            try:
                vals = integrate_periodic(g, spec, start=max(64, 2 * n_max), max_points=4096)
            except ConvergenceError:
                # sharp peaks (zeros of Φ*_n near the circle): adaptive panels instead
                vals = list(integrate_circle(f, (), local))
        else:
            vals = list(integrate_circle(f, measure.singular_locations, local))
        for a, m in measure.atoms:
            ab = mp.conj(a)
            for k in range(n_max + 1):
                vals[k] += m * ab**k
        return [mp.mpc(v) for v in vals]


@dataclass(frozen=True)
class LogIntegral:
    """Value of a log-type integral; ``diverged`` marks a certified ``-∞``."""

    value: mp.mpf
    diverged: bool = False
    partial: mp.mpf | None = None

    def __float__(self):
        return float(self.value)


def log_integral(measure, weight=None, spec=None):
    """``∫ p log w dm`` (``weight=None`` means ``p ≡ 1``), certifying ``-∞`` if needed."""
    spec = resolve_spec(spec)
    with mp.workprec(spec.precision_bits):
        if weight is None:
            f = lambda t: measure.log_density(t)
        else:
            f = lambda t: weight(t) * measure.log_density(t)
        if measure.kind == "lebesgue" and not measure.atoms:
            return LogIntegral(mp.mpf(0))
        sing = measure.singular_locations
        try:
            return LogIntegral(mp.re(integrate_circle(f, sing, spec)))
        except ConvergenceError:
            partial = certify_divergence(f, sing, spec)
            if partial is None:
                raise
            return LogIntegral(mp.ninf, diverged=True, partial=partial)


def p_log_integral(p, measure, spec=None):
    """``∫ p log σ'_ac dm``, the weighted log-integral of the polynomial Szegő condition."""
    return log_integral(measure, p, spec)


def total_mass(measure, spec=None):
    spec = resolve_spec(spec)
    with mp.workprec(spec.precision_bits):
        ac = integrate_circle(lambda t: mp.exp(measure.log_density(t)), measure.singular_locations, spec)
        return mp.re(ac) + measure.atom_mass


__all__ = [
    "DivergenceError",
    "LogIntegral",
    "Measure",
    "SingularPoint",
    "TrigWeight",
    "bernstein_szego",
    "laurent_expand",
    "lebesgue",
    "log_integral",
    "measure_from_json",
    "moments",
    "p_log_integral",
    "ps_exponential",
    "total_mass",
    "weight_from_json",
    "with_atoms",
]
