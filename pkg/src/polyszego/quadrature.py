"""Adaptive Gauss-Legendre panel quadrature on the unit circle.

All integrals are against the normalized arc-length measure ``dm = dθ/2π``.
The engine is globally adaptive: the panel with the largest error estimate is
bisected until the summed estimate is below tolerance.  Breakpoints are placed
at every declared singular point, so bisection produces the geometric grading
toward singularities automatically.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from functools import lru_cache

import mpmath as mp
import numpy as np

from .errors import ConvergenceError, DivergenceError, ValidationError


@dataclass(frozen=True)
class QuadratureSpec:
    """Working precision and tolerances for every circle integral."""

    precision_bits: int = 128
    base_panels: int = 16
    max_refinement_depth: int = 64
    abs_tol: float = 1e-20
    rel_tol: float = 1e-20
    order: int = 24
    max_panels: int = 200_000

    def __post_init__(self):
        if self.precision_bits < 64:
            raise ValidationError("precision_bits must be >= 64", field="precision_bits")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValidationError("tolerances must be positive", field="abs_tol")
        if self.base_panels < 1 or self.max_refinement_depth < 1 or self.order < 2:
            raise ValidationError("base_panels, max_refinement_depth and order must be positive")

    def to_dict(self):
        return {
            "precision_bits": self.precision_bits,
            "base_panels": self.base_panels,
            "max_refinement_depth": self.max_refinement_depth,
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "order": self.order,
        }

    @classmethod
    def from_dict(cls, doc):
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown quadrature keys: {sorted(unknown)}", field="quadrature")
        return cls(**doc)


DEFAULT_SPEC = QuadratureSpec()


def resolve_spec(spec):
    return DEFAULT_SPEC if spec is None else spec


@lru_cache(maxsize=32)
def gauss_legendre(order, prec):
    """Nodes and weights on [-1, 1] at ``prec`` bits."""
    with mp.workprec(prec + 20):
        nodes, weights = mp.gauss_quadrature(order, "legendre")
        nodes = [mp.mpf(x) for x in nodes]
        weights = [mp.mpf(w) for w in weights]
    return tuple(nodes), tuple(weights)


def _angle(point):
    return mp.arg(point)


def _segments(singular_angles):
    """Partition one period into segments whose endpoints are the singular angles."""
    if not singular_angles:
        return [(-mp.pi, mp.pi)]
    angles = sorted({mp.mpf(a) % (2 * mp.pi) for a in singular_angles})
    out = []
    for i, a in enumerate(angles):
        b = angles[i + 1] if i + 1 < len(angles) else angles[0] + 2 * mp.pi
        out.append((a, b))
    return out


class _Rule:
    def __init__(self, f, order, prec):
        self.f = f
        self.nodes, self.weights = gauss_legendre(order, prec)
        self.evaluations = 0
        self.vector = None

    def __call__(self, a, b):
        mid = (a + b) / 2
        half = (b - a) / 2
        vals = [self.f(mp.expj(mid + half * x)) for x in self.nodes]
        self.evaluations += len(self.nodes)
        if self.vector is None:
            self.vector = isinstance(vals[0], (list, tuple, np.ndarray))
        scale = half / (2 * mp.pi)
        if self.vector:
            return np.array(
                [mp.fdot(self.weights, col) * scale for col in zip(*vals)], dtype=object
            )
        return mp.fdot(self.weights, vals) * scale


def _size(val):
    if isinstance(val, np.ndarray):
        return max(abs(v) for v in val) if len(val) else mp.mpf(0)
    return abs(val)


GRADING = 8


def _integrate(f, singular_points, spec):
    rule = _Rule(f, spec.order, spec.precision_bits)
    segs = _segments([_angle(mp.mpc(p)) for p in singular_points])
    graded = bool(singular_points)
    total_len = sum(b - a for a, b in segs)
    panels = []
    for a, b in segs:
        k = max(2, int(mp.ceil(spec.base_panels * (b - a) / total_len)))
        h = (b - a) / k
        for i in range(k):
            # flags: does the panel touch a singular endpoint on the left/right
            panels.append((a + i * h, a + (i + 1) * h, graded and i == 0, graded and i == k - 1))

    counter = itertools.count()
    heap = []
    total = None
    total_err = mp.mpf(0)
    stuck_err = mp.mpf(0)

    def cut(a, b, sing_left, sing_right):
        # geometric grading toward singular endpoints, plain bisection elsewhere
        if sing_left and not sing_right:
            return a + (b - a) / GRADING
        if sing_right and not sing_left:
            return b - (b - a) / GRADING
        return (a + b) / 2

    def push(a, b, sl, sr, depth, whole):
        nonlocal total, total_err, stuck_err
        m = cut(a, b, sl, sr)
        left, right = rule(a, m), rule(m, b)
        value = left + right
        err = _size(whole - value)
        total = value if total is None else total + value
        total_err += err
        if depth >= spec.max_refinement_depth:
            stuck_err += err
        else:
            heapq.heappush(heap, (-err, next(counter), a, m, b, sl, sr, depth, value, left, right))

    for a, b, sl, sr in panels:
        push(a, b, sl, sr, 0, rule(a, b))

    n_panels = len(panels)
    while True:
        tol = max(mp.mpf(spec.abs_tol), spec.rel_tol * _size(total))
        if total_err <= tol:
            return total, total_err, rule.evaluations
        if not heap or n_panels > spec.max_panels or stuck_err > tol:
            raise ConvergenceError(
                "quadrature did not reach tolerance within the refinement budget",
                estimate=total,
                error=total_err,
            )
        neg_err, _, a, m, b, sl, sr, depth, value, left, right = heapq.heappop(heap)
        total = total - value
        total_err -= -neg_err
        push(a, m, sl, False, depth + 1, left)
        push(m, b, False, sr, depth + 1, right)
        n_panels += 1


def integrate_circle(f, singular_points=(), spec=None, *, return_error=False):
    """Integrate ``f(t)`` over the unit circle against ``dm = dθ/2π``.

    ``f`` receives a point ``t = e^{iθ}`` as an ``mpc`` and may return a scalar
    or a sequence (vector integrand; the error norm is the max over entries).
    ``singular_points`` are points of the circle where ``f`` may have an
    integrable singularity; they become panel endpoints and are never sampled.

    Raises :class:`ConvergenceError` (with ``estimate`` and ``error``) when the
    refinement budget is exhausted before the tolerance is met.
    """
    spec = resolve_spec(spec)
    with mp.workprec(spec.precision_bits):
        value, err, _ = _integrate(f, tuple(singular_points), spec)
    if return_error:
        return value, err
    return value


def shell_contributions(f, point, spec=None, levels=40, width=None):
    """Integrals of ``f`` over dyadic shells ``2^{-k-1}h <= |θ - θ_0| < 2^{-k}h``.

    Used to tell a slowly converging integrable singularity (geometrically
    shrinking shells) from a divergent one (non-shrinking shells).
    """
    spec = resolve_spec(spec)
    out = []
    with mp.workprec(spec.precision_bits):
        rule = _Rule(f, spec.order, spec.precision_bits)
        theta0 = _angle(mp.mpc(point))
        h = mp.mpf(width) if width is not None else mp.mpf(1) / 4
        for k in range(levels):
            lo, hi = h / 2 ** (k + 1), h / 2**k
            val = rule(theta0 + lo, theta0 + hi) + rule(theta0 - hi, theta0 - lo)
            if isinstance(val, np.ndarray):
                val = val[0]
            out.append(val)
    return out


def certify_divergence(f, singular_points, spec=None, levels=40, ratio=0.99, cutoff=None):
    """Return the partial integral if ``∫ f dm`` certifiably diverges to -∞, else None.

    Certification: near some singular point the dyadic shell integrals are all
    negative and do not shrink (ratio of successive shells >= ``ratio`` over the
    last half of the levels), or the partial integral falls below ``-cutoff``.
    """
    spec = resolve_spec(spec)
    if cutoff is None:
        cutoff = mp.mpf(10) ** (spec.precision_bits // 8)
    for point in singular_points:
        shells = shell_contributions(f, point, spec, levels=levels)
        with mp.workprec(spec.precision_bits):
            reals = [mp.re(s) for s in shells]
            partial = mp.fsum(reals)
            tail = reals[levels // 2 :]
            if all(s < 0 for s in tail) and all(
                b / a >= ratio for a, b in zip(tail, tail[1:])
            ):
                return partial
            if partial < -cutoff:
                return partial
    return None


def integrate_or_certify(f, singular_points=(), spec=None):
    """Integrate a real integrand, converting certified divergence into DivergenceError."""
    try:
        return integrate_circle(f, singular_points, spec)
    except ConvergenceError as exc:
        partial = certify_divergence(lambda t: mp.re(f(t)), singular_points, spec)
        if partial is not None:
            raise DivergenceError("integral diverges to -infinity", partial=partial) from exc
        raise


def integrate_periodic(f, spec=None, start=64, max_points=2**16):
    """Trapezoid rule on ``M`` equispaced points, doubled until two levels agree.

    For integrands analytic in an annulus around the circle the error decays
    geometrically in ``M``, so the difference between successive levels bounds
    the error of the coarser one.  ``f(t, j, M)`` receives the node
    ``t = e^{2πij/M}`` and may return a scalar or a list.
    """
    spec = resolve_spec(spec)
    with mp.workprec(spec.precision_bits):
        M = start
        total = _mean([f(mp.expj(2 * mp.pi * j / M), j, M) for j in range(M)])
        while True:
            M2 = 2 * M
            odd = _mean([f(mp.expj(2 * mp.pi * j / M2), j, M2) for j in range(1, M2, 2)])
            total2 = [(a + b) / 2 for a, b in zip(total, odd)]
            err = max(abs(a - b) for a, b in zip(total, total2))
            tol = max(mp.mpf(spec.abs_tol), spec.rel_tol * max(abs(a) for a in total2))
            if err <= tol:
                return total2 if _mean.vector else total2[0]
            if M2 >= max_points:
                raise ConvergenceError("trapezoid rule did not converge", estimate=total2, error=err)
            M, total = M2, total2


def _mean(vals):
    """Column means; scalars are wrapped into one-element lists."""
    _mean.vector = isinstance(vals[0], (list, tuple))
    rows = vals if _mean.vector else [[v] for v in vals]
    n = len(rows)
    return [mp.fsum(col) / n for col in zip(*rows)]
