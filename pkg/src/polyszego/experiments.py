"""Convergence harnesses producing :class:`ConvergenceTable` objects.

Pointwise quantities inside the disk (``D̃``, ``ψ_n``, ``φ*_n``, ``1/K_n(0,0)``)
are computed at full working precision.  Integrals over the whole circle of
products such as ``|D̃ φ̃*_n - 1|²`` use boundary values on a uniform float64
grid: ``D̃`` through an FFT conjugate function and ``ψ_n`` through its exact
rational form.  Inside the disk ``D̃`` grows without bound toward roots of
``p`` for measures outside the Szegő class, so values at a fixed radius such
as ``1 - 10^{-6}`` are useless there; the boundary route is the default and
the radius actually used is recorded as ``radial_offset`` in every table.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from ._numbers import to_mpc, to_pair
from .errors import ValidationError
from .measures import bernstein_szego, log_integral, moments, p_log_integral
from .quadrature import integrate_circle, resolve_spec
from .szego_core import (
    VerblunskySeq,
    as_verblunsky,
    chi_index,
    phi_pair_np,
    phi_star_np_table,
    phi_star_table,
    reproducing_kernel_zero,
    verblunsky_from_measure,
    verblunsky_from_moments,
)
from .szego_functions import (
    boundary_grid,
    kernel_data,
    modified_D,
    modified_D_boundary,
    psi_boundary_np,
    psi_n_laurent_table,
)


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


def format_number(x, precision_bits=53):
    """Shortest round-trip decimal at the given precision, locale independent."""
    if isinstance(x, (mp.mpf, mp.mpc)):
        x = mp.re(x) if isinstance(x, mp.mpc) else x
        if precision_bits <= 53:
            return repr(float(x))
        dps = mp.libmp.prec_to_dps(precision_bits) + 1
        return mp.nstr(x, dps, strip_zeros=True)
    return repr(float(x))


@dataclass
class ConvergenceTable:
    """Rows indexed by ``n``, one column per probe."""

    n_values: list
    columns: list
    metrics: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.metrics) != len(self.n_values):
            raise ValidationError("one metric row per n is required")
        for row in self.metrics:
            if len(row) != len(self.columns):
                raise ValidationError("metric rows must match the columns")

    def column(self, name):
        j = self.columns.index(name)
        return [row[j] for row in self.metrics]

    def validate(self):
        """Hard failure on NaN, infinity or negative entries."""
        for n, row in zip(self.n_values, self.metrics):
            for c, v in zip(self.columns, row):
                fv = float(v)
                if not math.isfinite(fv) or fv < 0:
                    raise ValidationError(f"invalid metric {c}={v} at n={n}")
        return self

    def loglog_slope(self, name, top_half=True):
        """Least-squares slope of ``log metric`` against ``log n``."""
        ns = np.array(self.n_values, dtype=float)
        ys = np.array([float(v) for v in self.column(name)])
        if top_half:
            k = len(ns) // 2
            ns, ys = ns[k:], ys[k:]
        if len(ns) < 2 or np.any(ys <= 0):
            return float("nan")
        return float(np.polyfit(np.log(ns), np.log(ys), 1)[0])

    def strictly_decreasing(self, name):
        col = [float(v) for v in self.column(name)]
        return all(b < a for a, b in zip(col, col[1:]))

    def to_csv(self):
        prec = int(self.metadata.get("precision_bits", 53))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n"] + list(self.columns))
        for n, row in zip(self.n_values, self.metrics):
            w.writerow([n] + [format_number(v, prec) for v in row])
        return buf.getvalue()

    def to_json(self):
        return {
            "n_values": list(self.n_values),
            "columns": list(self.columns),
            "metrics": [[float(v) for v in row] for row in self.metrics],
            "metadata": self.metadata,
        }


@dataclass
class SandwichReport:
    lower: mp.mpf
    upper: mp.mpf
    candidates: list
    rejected: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def best(self):
        return min((c["norm2"] for c in self.candidates), default=mp.inf)

    @property
    def gap(self):
        """``min ‖g‖²_σ - upper``, with sign."""
        return self.best - self.upper

    def ordered(self):
        return self.lower <= self.upper and all(self.lower <= c["norm2"] for c in self.candidates)

    def to_json(self):
        return {
            "lower": float(self.lower),
            "upper": float(self.upper),
            "gap": float(self.gap) if self.candidates else None,
            "candidates": [
                {"g": c["g"], "lambda": float(c["lambda"]), "norm2": float(c["norm2"])}
                for c in self.candidates
            ],
            "rejected": self.rejected,
            "metadata": self.metadata,
        }


def config_hash(doc):
    return hashlib.sha256(json.dumps(doc, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _meta(name, measure, data, spec, **extra):
    doc = {
        "experiment": name,
        "measure": measure.to_json() if measure is not None else None,
        "zetas": data.to_json()["zetas"] if data is not None else None,
        "precision_bits": spec.precision_bits,
        "quadrature": spec.to_dict(),
    }
    doc.update(extra)
    return doc


# ---------------------------------------------------------------------------
# Coefficients of catalog measures
# ---------------------------------------------------------------------------

_ALPHA_CACHE = {}


def measure_alphas(measure, n, spec=None):
    """``α_0..α_{n-1}`` for ``measure``, cached per process (prefixes are reused)."""
    spec = resolve_spec(spec)
    if measure.kind == "lebesgue" and not measure.atoms:
        return VerblunskySeq([0] * n)
    if measure.kind == "bernstein_szego" and not measure.atoms:
        given = VerblunskySeq(measure.params["alphas"])
        return given.padded(n) if len(given) < n else VerblunskySeq(given.alphas[:n])
    key = (measure.dumps(), tuple(sorted(spec.to_dict().items())))
    have = _ALPHA_CACHE.get(key)
    if have is None or len(have) < n:
        have = verblunsky_from_measure(measure, n, spec)
        _ALPHA_CACHE[key] = have
    return VerblunskySeq(have.alphas[:n])


def _resolve(measure, alphas, data, n_needed, spec):
    if data is None:
        data = kernel_data([])
    elif not hasattr(data, "zetas"):
        data = kernel_data(data)
    if alphas is None:
        alphas = measure_alphas(measure, n_needed, spec)
    alphas = as_verblunsky(alphas)
    if len(alphas) < n_needed:
        alphas = alphas.padded(n_needed) if measure.kind == "bernstein_szego" else alphas
    if len(alphas) < n_needed:
        raise ValidationError(f"need {n_needed} Verblunsky coefficients, have {len(alphas)}",
                              field="alphas")
    return alphas, data


# ---------------------------------------------------------------------------
# Modified asymptotics
# ---------------------------------------------------------------------------


def asym_pointwise(measure, alphas, data, z_grid, n_list, spec=None):
    """``|D̃(z) ψ_n(z) φ*_n(z) - 1|`` for each ``z`` (columns) and ``n`` (rows)."""
    spec = resolve_spec(spec)
    n_list = sorted(int(n) for n in n_list)
    alphas, data = _resolve(measure, alphas, data, max(n_list), spec)
    zs = [to_mpc(z) for z in z_grid]
    with mp.workprec(spec.precision_bits):
        Dt = modified_D(measure, data, zs, spec)
        psis = psi_n_laurent_table(alphas, n_list, data, spec.precision_bits)
        stars = [phi_star_table(alphas, n_list, z) for z in zs]
        rows = []
        for n in n_list:
            rows.append([abs(Dt[j] * psis[n](z) * stars[j][n] - 1) for j, z in enumerate(zs)])
    cols = [f"z{j}" for j in range(len(zs))]
    meta = _meta("asym_pointwise", measure, data, spec, z_grid=[to_pair(z) for z in zs])
    return ConvergenceTable(n_list, cols, rows, meta).validate()


def _boundary_product(measure, alphas, data, n_list, grid_size, radial_offset, prec=128):
    """Float64 values of ``D̃ φ̃*_n`` on the boundary grid (or on ``|z| = 1 - offset``)."""
    theta = boundary_grid(grid_size)
    weight = data.weight
    psis = psi_n_laurent_table(alphas, n_list, data, prec)
    if radial_offset:
        r = 1.0 - radial_offset
        t = r * np.exp(1j * theta)
        logw = measure.log_density_np(theta)
        v = np.where(np.isfinite(logw), weight.evaluate_np(theta) * logw, 0.0)
        S = _schwarz_on_grid(v, r)
        qz = np.full_like(t, complex(data.constantC))
        for zeta in data.zetas:
            qz = qz * (t - complex(zeta)) ** 2
        qz = qz / t ** data.N
        with np.errstate(over="ignore", invalid="ignore"):
            Dt = np.exp(S / (2 * qz))
        stars = phi_star_np_table(alphas.as_numpy(), n_list, t)
        out = {}
        for n in n_list:
            coeffs = psis[n].numpy_coefficients()
            R = sum(c * t ** (j - data.N) for j, c in enumerate(coeffs))
            with np.errstate(over="ignore", invalid="ignore"):
                out[n] = Dt * np.exp(R / qz) * stars[n]
        return theta, out
    t = np.exp(1j * theta)
    Dt = modified_D_boundary(measure, weight, theta)
    stars = phi_star_np_table(alphas.as_numpy(), n_list, t)
    return theta, {n: Dt * psi_boundary_np(psis[n], theta) * stars[n] for n in n_list}


def _schwarz_on_grid(v, r):
    """``S[v](r e^{iθ_j})`` for samples ``v`` on :func:`boundary_grid` angles."""
    n = len(v)
    k = np.fft.fftfreq(n, d=1.0 / n)
    # the grid offset θ_0 multiplies coefficient k by e^{-ikθ_0} in the forward
    # transform and by e^{ikθ_0} on resynthesis, so the phases cancel
    mult = np.where(k > 0, 2.0 * r ** np.abs(k), 0.0) + np.where(k == 0, 1.0, 0.0)
    return np.fft.ifft(np.fft.fft(v) * mult)


def asym_l2(measure, alphas, data, n_list, spec=None, grid_size=2**16, arc=None,
            radial_offset=0.0):
    """``∫ |D̃ φ̃*_n - 1|² dm`` (column ``l2``), optionally over an arc (``l2_arc``).

    ``arc = (θ_a, θ_b)`` restricts the integral to ``θ ∈ [θ_a, θ_b]`` (taken mod
    2π); the arc mass is still measured with ``dm``.
    """
    spec = resolve_spec(spec)
    n_list = sorted(int(n) for n in n_list)
    alphas, data = _resolve(measure, alphas, data, max(n_list), spec)
    theta, prod = _boundary_product(measure, alphas, data, n_list, grid_size, radial_offset,
                                    spec.precision_bits)
    cols = ["l2"]
    mask = None
    if arc is not None:
        a, b = float(arc[0]), float(arc[1])
        rel = np.mod(theta - a, 2 * np.pi)
        mask = rel <= (b - a) % (2 * np.pi) if (b - a) % (2 * np.pi) else np.ones_like(theta, bool)
        cols.append("l2_arc")
    rows = []
    for n in n_list:
        err = np.abs(prod[n] - 1) ** 2
        row = [float(np.mean(err))]
        if mask is not None:
            row.append(float(np.sum(err[mask]) / grid_size))
        rows.append(row)
    meta = _meta("asym_l2", measure, data, spec, grid_size=grid_size, radial_offset=radial_offset,
                 arc=list(arc) if arc is not None else None)
    return ConvergenceTable(n_list, cols, rows, meta).validate()


def growth_probe_points(data, eps, radii=(0.9, 0.99, 0.999), n_angles=32):
    pts = []
    for r in radii:
        for j in range(n_angles):
            z = mp.mpf(r) * mp.expj(2 * mp.pi * (j + mp.mpf(1) / 2) / n_angles)
            if all(abs(z - zeta) >= eps for zeta in data.zetas):
                pts.append(z)
    return pts


def growth_bound_probe(measure, alphas, data, eps, n_list, spec=None,
                       radii=(0.9, 0.99, 0.999), n_angles=32, grid_size=2**17):
    """``sup_z √(1-|z|) |D̃(z) φ̃*_n(z)|`` over rays outside the ``ε``-balls around the roots.

    ``D̃`` at the probe points comes from the Fourier series of ``p log w``
    (:func:`modified_D_interior_np`); ``ψ_n`` and ``φ*_n`` are evaluated at full
    precision.
    """
    spec = resolve_spec(spec)
    n_list = sorted(int(n) for n in n_list)
    alphas, data = _resolve(measure, alphas, data, max(n_list), spec)
    with mp.workprec(spec.precision_bits):
        pts = growth_probe_points(data, eps, radii, n_angles)
        if not pts:
            raise ValidationError("no probe points outside the excluded balls", field="eps")
        Dt = modified_D_interior_np(measure, data, [complex(z) for z in pts], grid_size)
        Dt = [mp.mpc(complex(x)) for x in Dt]
        psis = psi_n_laurent_table(alphas, n_list, data, spec.precision_bits)
        stars = [phi_star_table(alphas, n_list, z) for z in pts]
        rows = []
        for n in n_list:
            vals = [
                mp.sqrt(1 - abs(z)) * abs(Dt[j] * psis[n](z) * stars[j][n])
                for j, z in enumerate(pts)
            ]
            rows.append([max(vals)])
    meta = _meta("growth_bound_probe", measure, data, spec, eps=float(eps), radii=list(radii),
                 n_angles=n_angles, grid_size=grid_size)
    return ConvergenceTable(n_list, ["sup"], rows, meta).validate()


def modified_D_interior_np(measure, data, points, grid_size=2**17):
    """Float64 ``D̃(z) = exp(S[p log w](z) / (2 q(z)))`` from FFT Fourier coefficients.

    ``S[v](z) = v̂_0 + 2 Σ_{k≥1} v̂_k z^k``; the series is cut at ``grid_size/2``
    terms, which is ample for ``|z| ≤ 0.999`` at the default size.
    """
    theta = boundary_grid(grid_size)
    logw = measure.log_density_np(theta)
    v = np.where(np.isfinite(logw), data.weight.evaluate_np(theta) * logw, 0.0)
    # true Fourier coefficients v̂_k, k = 0..grid_size/2 - 1 (grid offset removed)
    k = np.arange(grid_size // 2)
    vh = np.fft.fft(v)[: grid_size // 2] / grid_size * np.exp(-1j * k * theta[0])
    coeffs = 2 * vh
    coeffs[0] = vh[0]
    out = []
    for z in points:
        z = complex(z)
        S = np.polynomial.polynomial.polyval(z, coeffs)
        q = complex(data.constantC)
        for zeta in data.zetas:
            q *= (z - complex(zeta)) ** 2
        q /= z ** data.N if data.N else 1
        out.append(np.exp(S / (2 * q)) if z != 0 or data.N == 0 else 1.0 + 0j)
    return np.array(out)


def growth_constant_stable(table, factor=2.0):
    """Max of the ``sup`` column within ``factor`` of its median."""
    col = np.array([float(v) for v in table.column("sup")])
    return bool(col.max() <= factor * np.median(col))


# ---------------------------------------------------------------------------
# Wave-operator function model
# ---------------------------------------------------------------------------


def wave_operator_probe(measure, alphas, data, m_exponent, n_list, spec=None, grid_size=2**14):
    """``‖ψ_{2n} z^n χ_{j'} - χ_{E_ac} z^m / D̃‖_{L²(σ)}`` with ``χ_{j'}`` of exponent ``m - n``.

    Since ``|D̃|² = σ'_ac`` on the circle, the absolutely continuous part equals
    ``∫ |D̃ ψ_{2n} z^n χ_{j'} - z^m|² dm``; at each atom ``a`` the target vanishes
    and the contribution is ``σ({a}) |ψ_{2n}(a) a^n χ_{j'}(a)|²``.
    """
    spec = resolve_spec(spec)
    n_list = sorted(int(n) for n in n_list)
    m = int(m_exponent)
    idx = {n: chi_index(m - n) for n in n_list}
    need = max(max(idx.values()), 2 * max(n_list))
    alphas, data = _resolve(measure, alphas, data, need, spec)
    if any(j > len(alphas) for j in idx.values()):
        raise ValidationError("basis index j' beyond the available coefficients", field="n_list")
    theta = boundary_grid(grid_size)
    t = np.exp(1j * theta)
    Dt = modified_D_boundary(measure, data.weight, theta)
    psis = psi_n_laurent_table(alphas, [2 * n for n in n_list], data, spec.precision_bits)
    a_np = alphas.as_numpy()
    atoms = [(complex(a), float(w)) for a, w in measure.atoms]
    rows = []
    for n in n_list:
        j = idx[n]

        def model(points, n=n, j=j):
            ang = np.angle(points)
            chi = _chi_np(a_np, j, points)
            return psi_boundary_np(psis[2 * n], ang) * points**n * chi

        ac = np.mean(np.abs(Dt * model(t) - t**m) ** 2)
        sing = sum(w * abs(model(np.array([a]))[0]) ** 2 for a, w in atoms)
        rows.append([float(np.sqrt(ac + sing))])
    meta = _meta("wave_operator_probe", measure, data, spec, m_exponent=m, grid_size=grid_size,
                 basis_indices={str(n): j for n, j in idx.items()})
    return ConvergenceTable(n_list, ["residual"], rows, meta).validate()


def _chi_np(a, j, z):
    if j == 0:
        return np.ones_like(z)
    phi, star = phi_pair_np(a, j, z)
    k = (j + 1) // 2
    return (star if j % 2 else phi) * z ** (-k)


# ---------------------------------------------------------------------------
# Variational sandwich
# ---------------------------------------------------------------------------


def exp_series(E, degree):
    """Taylor coefficients of ``exp(E(z))`` up to ``degree``."""
    g = [mp.exp(E[0])] + [mp.mpc(0)] * degree
    for k in range(1, degree + 1):
        g[k] = mp.fsum(j * E[j] * g[k - j] for j in range(1, min(k, len(E) - 1) + 1)) / k
    return g


def outer_truncation(measure, degree, spec=None, clip=None):
    """Degree-``d`` Taylor polynomial of ``exp(S[-½ log w])``, the reciprocal outer function.

    ``clip`` replaces ``log w`` by the smooth floor ``-L tanh(-log w / L)`` so that
    measures outside the Szegő class still yield candidates.
    """
    spec = resolve_spec(spec)
    with mp.workprec(spec.precision_bits):
        if measure.kind == "lebesgue":
            return [mp.mpc(1)] + [mp.mpc(0)] * degree
        if clip is None:
            ld = measure.log_density
        else:
            L = mp.mpf(clip)
            ld = lambda t: -L * mp.tanh(-measure.log_density(t) / L)

        def f(t):
            u = -ld(t) / 2
            out = [u]
            tb = mp.conj(t)
            for _ in range(degree):
                out.append(out[-1] * tb)
            return out

        loose = type(spec)(**{**spec.to_dict(), "abs_tol": max(spec.abs_tol, 1e-14),
                              "rel_tol": max(spec.rel_tol, 1e-14)})
        uh = integrate_circle(f, measure.singular_locations, loose)
        E = [mp.mpc(mp.re(uh[0]))] + [2 * uh[k] for k in range(1, degree + 1)]
        return exp_series(E, degree)


def validate_candidate(coeffs, prec=None):
    """Check ``g(0) > 0`` and that ``g`` has no zero in the closed disk."""
    g = [to_mpc(c) for c in coeffs]
    while len(g) > 1 and g[-1] == 0:
        g.pop()
    if not (abs(mp.im(g[0])) <= mp.mpf(10) ** -30 * max(1, abs(g[0])) and mp.re(g[0]) > 0):
        raise ValidationError(f"g(0) = {complex(g[0])} is not positive", field="g")
    if len(g) > 1:
        roots = mp.polyroots(list(reversed(g)), maxsteps=200, extraprec=2 * (prec or mp.mp.prec))
        for r in roots:
            if abs(r) <= 1:
                raise ValidationError(f"candidate has a zero at {complex(r)} in the closed disk",
                                      field="g")
    return [mp.mpc(mp.re(g[0]))] + g[1:]


def _lambda(p, g, spec):
    val = integrate_circle(
        lambda t: p(t) * mp.log(abs(mp.polyval(list(reversed(g)), t))), (), spec
    )
    return mp.exp(mp.re(val))


def _norm2(g, c):
    """``‖g‖²_σ = Σ_{i,j} g_i ḡ_j c_{j-i}`` from the moments, atoms included."""
    total = mp.mpc(0)
    for i, gi in enumerate(g):
        for j, gj in enumerate(g):
            k = j - i
            ck = c[k] if k >= 0 else mp.conj(c[-k])
            total += gi * mp.conj(gj) * ck
    return mp.re(total)


def _family_members(measure, g_family, spec):
    for item in g_family:
        if isinstance(item, dict):
            kind = item.get("kind", "coefficients")
            if kind == "outer_truncation":
                yield item, outer_truncation(measure, int(item["degree"]), spec, item.get("clip"))
            elif kind == "coefficients":
                yield item, [to_mpc(c) for c in item["coeffs"]]
            else:
                raise ValidationError(f"unknown candidate kind {kind!r}", field="g_family")
        else:
            yield {"kind": "coefficients", "coeffs": [to_pair(c) for c in item]}, list(item)


def variational_sandwich(measure, p, g_family, spec=None):
    """Lower bound, upper bound and normalized candidate norms for the weighted extremal problem.

    ``lower = exp ∫ p log(w/p) dm`` and ``upper = exp ∫ p log w dm``.  Every
    candidate ``g`` is validated (zero-free on the closed disk, ``g(0) > 0``),
    rescaled by a positive constant to ``λ(g) = exp ∫ p log|g| dm = 1`` and its
    ``‖g‖²_σ`` reported.  Candidates failing validation are listed as rejected.
    """
    spec = resolve_spec(spec)
    with mp.workprec(spec.precision_bits):
        plw = p_log_integral(p, measure, spec)
        roots = tuple(p.roots)
        plp = integrate_circle(lambda t: p(t) * mp.log(p(t)) if p(t) > 0 else mp.mpf(0), roots, spec) \
            if p.N else mp.mpf(0)
        if plw.diverged:
            upper = lower = mp.mpf(0)
        else:
            upper = mp.exp(plw.value)
            lower = mp.exp(plw.value - mp.re(plp))
        p0 = mp.re(p.laurent[0])
        cands, rejected = [], []
        members = list(_family_members(measure, g_family, spec))
        deg = max((len(g) - 1 for _, g in members), default=0)
        c = moments(measure, deg, spec) if members else []
        for desc, g in members:
            try:
                g = validate_candidate(g, spec.precision_bits)
            except ValidationError as exc:
                rejected.append({"g": desc, "reason": str(exc)})
                continue
            lam = _lambda(p, g, spec)
            scale = lam ** (-1 / p0)
            g = [scale * x for x in g]
            cands.append({"g": desc, "lambda": _lambda(p, g, spec), "norm2": _norm2(g, c),
                          "coeffs": g})
        meta = _meta("variational_sandwich", measure, None, spec, weight=p.to_json())
        return SandwichReport(lower, upper, cands, rejected, meta)


# ---------------------------------------------------------------------------
# Extremal distance and the inverse problem
# ---------------------------------------------------------------------------


def szego_distance_experiment(measure, n_list, spec=None, alphas=None):
    """``1/K_n(0,0)`` against ``exp ∫ log σ' dm`` (0 when the integral diverges)."""
    spec = resolve_spec(spec)
    n_list = sorted(int(n) for n in n_list)
    with mp.workprec(spec.precision_bits):
        if alphas is None:
            alphas = measure_alphas(measure, max(n_list), spec)
        alphas = as_verblunsky(alphas)
        li = log_integral(measure, None, spec)
        target = mp.mpf(0) if li.diverged else mp.exp(li.value)
        rows = []
        for n in n_list:
            d = 1 / reproducing_kernel_zero(alphas, n)
            rows.append([d, target, abs(d - target)])
    meta = _meta("szego_distance", measure, None, spec, target_diverged=li.diverged)
    return ConvergenceTable(n_list, ["inv_kernel", "target", "abs_gap"], rows, meta).validate()


def random_alphas(rng, n, max_abs=0.5):
    r = max_abs * np.sqrt(rng.uniform(0, 1, n))
    ph = rng.uniform(0, 2 * np.pi, n)
    return VerblunskySeq([complex(x) for x in r * np.exp(1j * ph)])


def roundtrip_error(alphas, spec=None):
    """``max_k |α_k - α̂_k|`` for ``α → Bernstein–Szegő density → moments → α̂``."""
    spec = resolve_spec(spec)
    alphas = as_verblunsky(alphas)
    with mp.workprec(spec.precision_bits):
        mu = bernstein_szego(alphas, spec)
        c = moments(mu, len(alphas), spec)
        back = verblunsky_from_moments(c, len(alphas))
        return max(abs(a - b) for a, b in zip(alphas, back))


def precision_scaling_experiment(n_list, precisions, seed=0, max_abs=0.5, spec=None):
    """Round-trip error for random sequences of each length at each working precision."""
    from .quadrature import QuadratureSpec

    spec = resolve_spec(spec)
    rng = np.random.default_rng(seed)
    seqs = {n: random_alphas(rng, n, max_abs) for n in sorted(n_list)}
    rows = []
    for n in sorted(n_list):
        row = []
        for bits in precisions:
            tol = 2.0 ** (-(bits - 8))
            local = QuadratureSpec(**{**spec.to_dict(), "precision_bits": bits,
                                      "abs_tol": tol, "rel_tol": tol})
            with mp.workprec(bits):
                seq = VerblunskySeq(seqs[n].alphas)
            row.append(roundtrip_error(seq, local))
        rows.append(row)
    meta = {"experiment": "precision_scaling", "seed": seed, "max_abs": max_abs,
            "precisions": list(precisions)}
    return ConvergenceTable(sorted(n_list), [f"bits{b}" for b in precisions], rows, meta).validate()
