"""Szegő function, modified Schwarz kernel and the correction factors ψ_n.

For roots ``ζ_1..ζ_N`` of the weight put ``q(z) = C ∏(z - ζ_k)² / z^N`` with
``C = ∏(-ζ_k)^{-1}``, so ``q = p`` on the circle, and

    K(t, z)  = (t + z)/(t - z) · q(t)/q(z),
    D̃(z)     = exp(½ ∫ K(t, z) log σ'(t) dm(t)),
    φ̃*_n(z)  = exp(∫ K(t, z) log|φ*_n(t)| dm(t)) = ψ_n(z) φ*_n(z).

Every exponent is an integral of a real function against a complex kernel, so
no branch of the logarithm is ever chosen.  ``ψ_n`` is available two ways: by
quadrature (:func:`psi_n_eval`) and in closed rational form from the Taylor
coefficients of ``log φ*_n`` (:func:`psi_n_laurent`).  The two are independent
and are compared in the tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from ._numbers import to_mpc, to_pair
from .errors import ConvergenceError, NonSzegoError, ProximityError, ValidationError
from .measures import TrigWeight, laurent_expand, log_integral
from .quadrature import integrate_circle, integrate_periodic, resolve_spec
from .szego_core import as_verblunsky, eval_phi_star, szego_recurse


# ---------------------------------------------------------------------------
# Kernel data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModifiedKernelData:
    zetas: tuple
    constantC: mp.mpc
    weight: TrigWeight

    @property
    def N(self):
        return len(self.zetas)

    def to_json(self):
        return {"zetas": [to_pair(z) for z in self.zetas], "C": to_pair(self.constantC)}


def kernel_data(zetas):
    """Validated :class:`ModifiedKernelData` for simple unimodular roots."""
    if isinstance(zetas, TrigWeight):
        weight = zetas
    else:
        weight = laurent_expand(list(zetas))
    C = mp.mpc(1)
    for z in weight.roots:
        C /= -z
    return ModifiedKernelData(tuple(weight.roots), C, weight)


def q_eval(data, z):
    """``q(z) = C ∏(z - ζ_k)² / z^N``; real on the circle."""
    z = to_mpc(z)
    if data.N == 0:
        return mp.mpc(data.constantC)
    if z == 0:
        raise ValidationError("q has a pole at z = 0", field="z")
    val = data.constantC
    for zeta in data.zetas:
        val *= (z - zeta) ** 2
    return val / z**data.N


def _check_point(data, z, spec, boundary=False):
    z = to_mpc(z)
    if boundary:
        if abs(abs(z) - 1) > mp.mpf(10) ** (-10):
            raise ValidationError("point must lie on the unit circle", field="z")
    elif not abs(z) < 1:
        raise ValidationError("point must lie in the open unit disk", field="z")
    threshold = mp.mpf(10) ** (-mp.mpf(spec.precision_bits) / 8)
    for zeta in data.zetas:
        if abs(z - zeta) < threshold:
            raise ProximityError(
                f"z is within {mp.nstr(threshold, 3)} of the root {complex(zeta)}", field="z"
            )
    return z


def _as_points(z):
    if isinstance(z, (list, tuple, np.ndarray)):
        return [to_mpc(x) for x in z], True
    return [to_mpc(z)], False


def _breakpoints(points, extra=()):
    """Radial projections of points close to the circle, where kernels peak."""
    out = list(extra)
    for z in points:
        if abs(z) > mp.mpf("0.5"):
            out.append(z / abs(z))
    # deduplicate while keeping order
    seen, uniq = set(), []
    for b in out:
        key = round(float(mp.arg(b)), 14)
        if key not in seen:
            seen.add(key)
            uniq.append(b)
    return uniq


def _near_zeros(alphas, n, width=0.05):
    """Radial projections of zeros of ``Φ*_n`` within ``width`` of the circle."""
    if n == 0:
        return []
    coeffs = [complex(c) for c in szego_recurse(alphas, n).PhiStar]
    roots = np.roots(coeffs[::-1])
    return [mp.expj(float(np.angle(r))) for r in roots if abs(r) < 1 + width]


def _smooth_integral(f, zs, alphas, n, spec):
    """Integral of ``K(t, z) log|φ*_n(t)|``-type integrands over the circle.

    The integrand is analytic near the circle, so the trapezoid rule converges
    geometrically unless a pole ``z`` or a zero of ``φ*_n`` comes close; then
    adaptive panels take over, refined toward those points.
    """
    near = _near_zeros(alphas, n)
    if not near and max(abs(z) for z in zs) <= mp.mpf("0.9"):
        try:
            vals = integrate_periodic(lambda t, j, M: f(t), spec, start=max(64, 2 * n),
                                      max_points=4096)
            return vals if isinstance(vals, list) else [vals]
        except ConvergenceError:
            pass
    return integrate_circle(f, _breakpoints(zs, near), spec)


def _modified_integrals(real_f, data, zs, spec, singular=()):
    """``∫ K(t, z) real_f(t) dm`` for every ``z`` in ``zs`` (``z ≠ 0``) in one pass."""
    qz = [q_eval(data, z) for z in zs]

    def f(t):
        u = real_f(t)
        if u == 0:
            return [mp.mpc(0)] * len(zs)
        qt = q_eval(data, t) if data.N else data.constantC
        return [(t + z) / (t - z) * qt / qq * u for z, qq in zip(zs, qz)]

    return integrate_circle(f, _breakpoints(zs, singular), spec)


# ---------------------------------------------------------------------------
# Szegő function and modified Szegő function
# ---------------------------------------------------------------------------


def schwarz_D(measure, z, spec=None):
    """``D(z) = exp(½ ∫ (t+z)/(t-z) log σ'(t) dm)``; refuses non-Szegő measures."""
    spec = resolve_spec(spec)
    zs, vector = _as_points(z)
    with mp.workprec(spec.precision_bits):
        for x in zs:
            if not abs(x) < 1:
                raise ValidationError("point must lie in the open unit disk", field="z")
        total = log_integral(measure, None, spec)
        if total.diverged:
            raise NonSzegoError(
                "measure is not in the Szegő class; use modified_D", partial=total.partial
            )
        if measure.kind == "lebesgue":
            vals = [mp.mpc(1)] * len(zs)
        else:
            ld = measure.log_density
            vals = integrate_circle(
                lambda t: [(t + x) / (t - x) * ld(t) for x in zs],
                _breakpoints(zs, measure.singular_locations),
                spec,
            )
            vals = [mp.exp(v / 2) for v in vals]
    return vals if vector else vals[0]


def modified_D(measure, data, z, spec=None):
    """``D̃(z) = exp(½ ∫ K(t, z) log σ'(t) dm)``.  ``D̃(0) = 1`` by continuity."""
    spec = resolve_spec(spec)
    zs, vector = _as_points(z)
    with mp.workprec(spec.precision_bits):
        zs = [_check_point(data, x, spec) for x in zs]
        if data.N == 0:
            try:
                out = schwarz_D(measure, zs, spec)
            except NonSzegoError:
                raise
            return out if vector else out[0]
        out = [mp.mpc(1)] * len(zs)
        idx = [i for i, x in enumerate(zs) if x != 0]
        if idx and measure.kind != "lebesgue":
            sub = [zs[i] for i in idx]
            vals = _modified_integrals(measure.log_density, data, sub, spec, measure.singular_locations)
            for i, v in zip(idx, vals):
                out[i] = mp.exp(v / 2)
    return out if vector else out[0]


def modified_phi_star(alphas, n, data, z, spec=None):
    """``φ̃*_n(z) = exp(∫ K(t, z) log|φ*_n(t)| dm)``."""
    spec = resolve_spec(spec)
    alphas = as_verblunsky(alphas)
    zs, vector = _as_points(z)
    with mp.workprec(spec.precision_bits):
        zs = [_check_point(data, x, spec) for x in zs]
        if data.N == 0:
            out = [eval_phi_star(alphas, n, x) for x in zs]
            return out if vector else out[0]
        out = [mp.mpc(1)] * len(zs)
        idx = [i for i, x in enumerate(zs) if x != 0]
        if idx:
            sub = [zs[i] for i in idx]
            qz = [q_eval(data, x) for x in sub]

            def f(t):
                u = mp.log(abs(eval_phi_star(alphas, n, t)))
                qt = q_eval(data, t)
                return [(t + x) / (t - x) * qt / qq * u for x, qq in zip(sub, qz)]

            vals = _smooth_integral(f, sub, alphas, n, spec)
            for i, v in zip(idx, vals):
                out[i] = mp.exp(v)
    return out if vector else out[0]


def log_psi_n_eval(alphas, n, data, z, spec=None):
    """Exponent ``∫ (t+z)/(t-z) (q(t)/q(z) - 1) log|φ*_n(t)| dm`` by quadrature."""
    spec = resolve_spec(spec)
    alphas = as_verblunsky(alphas)
    zs, vector = _as_points(z)
    with mp.workprec(spec.precision_bits):
        zs = [_check_point(data, x, spec) for x in zs]
        out = [mp.mpc(0)] * len(zs)
        if n > 0 and alphas.rank > 0 and data.N > 0:
            idx = [i for i, x in enumerate(zs) if x != 0]
            zero = [i for i, x in enumerate(zs) if x == 0]
            if zero:
                # q(t)/q(0) = 0, and the mean of log|φ*_n| is log φ*_n(0)
                v0 = -mp.log(eval_phi_star(alphas, n, 0))
                for i in zero:
                    out[i] = mp.mpc(v0)
            if idx:
                sub = [zs[i] for i in idx]
                qz = [q_eval(data, x) for x in sub]

                def f(t):
                    u = mp.log(abs(eval_phi_star(alphas, n, t)))
                    qt = q_eval(data, t)
                    return [(t + x) / (t - x) * (qt / qq - 1) * u for x, qq in zip(sub, qz)]

                vals = _smooth_integral(f, sub, alphas, n, spec)
                for i, v in zip(idx, vals):
                    out[i] = v
    return out if vector else out[0]


def psi_n_eval(alphas, n, data, z, spec=None):
    """``ψ_n(z)`` from its defining integral."""
    vals = log_psi_n_eval(alphas, n, data, z, spec)
    if isinstance(vals, list):
        return [mp.exp(v) for v in vals]
    return mp.exp(vals)


# ---------------------------------------------------------------------------
# Closed rational form of log ψ_n
# ---------------------------------------------------------------------------


def log_series(coeffs, order):
    """Taylor coefficients ``g_0..g_order`` of ``log P`` for ``P(0) = 1``."""
    P = list(coeffs) + [mp.mpc(0)] * max(0, order + 1 - len(coeffs))
    g = [mp.mpc(0)] * (order + 1)
    for k in range(1, order + 1):
        s = k * P[k] - mp.fsum(j * g[j] * P[k - j] for j in range(1, k))
        g[k] = s / k
    return g


def _phi_star_heads(alphas, n_list, order):
    """First ``order + 1`` Taylor coefficients of ``Φ*_n`` for each ``n``."""
    alphas = as_verblunsky(alphas)
    wanted = sorted(set(n_list))
    out = {}
    Phi = [mp.mpc(1)]
    Star = [mp.mpc(1)]
    k = 0
    for n in wanted:
        while k < n:
            a = alphas[k]
            zPhi = [mp.mpc(0)] + Phi
            Star_ext = Star + [mp.mpc(0)]
            Phi = [x - mp.conj(a) * y for x, y in zip(zPhi, Star_ext)]
            Star = [y - a * x for x, y in zip(zPhi, Star_ext)]
            k += 1
        out[n] = Star[: order + 1]
    return out


@dataclass(frozen=True)
class PsiLaurent:
    """``log ψ_n(z) = R(z) / q(z)`` with ``R`` a Laurent polynomial on ``[-N, N]``."""

    n: int
    R: dict
    data: ModifiedKernelData

    def log_eval(self, z):
        z = to_mpc(z)
        if self.data.N == 0:
            return mp.mpc(0)
        if z == 0:
            # R(z)/q(z) at 0: ratio of leading coefficients of z^{-N}
            return self.R[-self.data.N] / (self.data.constantC * mp.fprod(
                zeta**2 for zeta in self.data.zetas
            ))
        num = mp.fsum(c * z**k for k, c in self.R.items())
        return num / q_eval(self.data, z)

    def __call__(self, z):
        return mp.exp(self.log_eval(z))

    def numpy_coefficients(self):
        N = self.data.N
        return np.array([complex(self.R.get(k, 0)) for k in range(-N, N + 1)])


def psi_n_laurent_table(alphas, n_list, data, prec=None):
    """:class:`PsiLaurent` for each ``n`` in ``n_list`` from one recursion pass.

    With ``f = log φ*_n`` (Taylor coefficients ``f_k``) and ``u = Re f`` on the
    circle, ``∫ (t+z)/(t-z) q(t) u(t) dm = ĝ_0 + 2 Σ_{k≥1} ĝ_k z^k`` with
    ``ĝ = (q u)^``, and subtracting ``q(z) f(z)`` leaves a Laurent polynomial
    supported on ``[-N, N]``.
    """
    alphas = as_verblunsky(alphas)
    N = data.N
    with mp.workprec(prec or mp.mp.prec):
        heads = _phi_star_heads(alphas, n_list, 2 * N)
        p_hat = data.weight.laurent
        out = {}
        for n, head in heads.items():
            f = log_series(head, 2 * N)
            f[0] = -mp.fsum(mp.log(1 - abs(alphas[k]) ** 2) for k in range(n)) / 2
            u = {0: mp.mpc(mp.re(f[0]))}
            for k in range(1, 2 * N + 1):
                u[k] = f[k] / 2
                u[-k] = mp.conj(f[k]) / 2
            qf = {}
            for j, pj in p_hat.items():
                for m, fm in enumerate(f):
                    qf[j + m] = qf.get(j + m, 0) + pj * fm
            R = {}
            for k in range(-N, N + 1):
                g = mp.fsum(pj * u[k - j] for j, pj in p_hat.items()) if k >= 0 else 0
                val = (g if k == 0 else 2 * g) - qf.get(k, 0)
                R[k] = mp.mpc(val)
            out[n] = PsiLaurent(n, R, data)
        return out


def psi_n_laurent(alphas, n, data, prec=None):
    return psi_n_laurent_table(alphas, [n], data, prec)[n]


# ---------------------------------------------------------------------------
# Pole-basis coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PsiCoefficients:
    """``log ψ_n = A_0 + Σ_k (A_k (z+ζ_k)/(z-ζ_k) + B_k ((z+ζ_k)/(z-ζ_k))²)``."""

    n: int
    A0n: mp.mpc
    Akn: tuple
    Bkn: tuple
    zetas: tuple = ()
    residual: mp.mpf = mp.mpf(0)
    holdout_residual: mp.mpf = mp.mpf(0)

    def log_eval(self, z):
        z = to_mpc(z)
        val = self.A0n
        for zeta, A, B in zip(self.zetas, self.Akn, self.Bkn):
            u = (z + zeta) / (z - zeta)
            val += A * u + B * u * u
        return val

    def class_violation(self):
        """Max of ``|Re A_0|, |Im A_k|, |Re B_k|``."""
        vals = [abs(mp.re(self.A0n))]
        vals += [abs(mp.im(a)) for a in self.Akn]
        vals += [abs(mp.re(b)) for b in self.Bkn]
        return max(vals)

    def to_json(self):
        return json.dumps(
            {
                "n": self.n,
                "A0n": to_pair(self.A0n),
                "Akn": [to_pair(a) for a in self.Akn],
                "Bkn": [to_pair(b) for b in self.Bkn],
                "zetas": [to_pair(z) for z in self.zetas],
                "holdout_residual": float(self.holdout_residual),
            },
            sort_keys=True,
        )


def _fit_grid(data, count, radius, phase):
    pts = []
    for j in range(count):
        z = radius * mp.expj(2 * mp.pi * (j + phase) / count)
        if all(abs(z - zeta) > mp.mpf("0.05") for zeta in data.zetas):
            pts.append(z)
    return pts


def _basis_row(data, z):
    row = [mp.mpc(1)]
    for zeta in data.zetas:
        u = (z + zeta) / (z - zeta)
        row += [u, u * u]
    return row


def psi_coefficients(alphas, n, data, spec=None, grid=16, radius="0.6", holdout=8, tol=1e-8,
                     log_values=None):
    """Least-squares fit of ``log ψ_n`` against ``{1, u_k, u_k²}``, ``u_k = (z+ζ_k)/(z-ζ_k)``.

    The exponent is sampled by quadrature (:func:`log_psi_n_eval`) on a circle
    of radius ``radius`` and validated on ``holdout`` interleaved points.  If the
    held-out residual exceeds ``tol`` the grid is doubled once before giving up.
    ``log_values`` may replace the quadrature sampler (a callable on a list).
    """
    spec = resolve_spec(spec)
    alphas = as_verblunsky(alphas)
    sampler = log_values or (lambda zs: log_psi_n_eval(alphas, n, data, zs, spec))
    with mp.workprec(spec.precision_bits):
        r = mp.mpf(radius)
        for attempt in range(2):
            pts = _fit_grid(data, grid, r, 0)
            hold = _fit_grid(data, holdout, r * mp.mpf("0.8"), mp.mpf(1) / 3)
            vals = sampler(pts + hold)
            fit_vals, hold_vals = vals[: len(pts)], vals[len(pts):]
            A = mp.matrix([_basis_row(data, z) for z in pts])
            b = mp.matrix(fit_vals)
            x, res = mp.qr_solve(A, b)
            coeffs = [x[i] for i in range(A.cols)]
            hres = max(
                (abs(mp.fsum(c * v for c, v in zip(coeffs, _basis_row(data, z))) - y)
                 for z, y in zip(hold, hold_vals)),
                default=mp.mpf(0),
            )
            if hres <= tol:
                break
            if attempt == 1:
                raise ConvergenceError(
                    f"psi fit held-out residual {mp.nstr(hres, 3)} exceeds {tol}",
                    estimate=coeffs,
                    error=hres,
                )
            grid *= 2
        return PsiCoefficients(
            n=n,
            A0n=coeffs[0],
            Akn=tuple(coeffs[1::2]),
            Bkn=tuple(coeffs[2::2]),
            zetas=tuple(data.zetas),
            residual=res,
            holdout_residual=hres,
        )


# ---------------------------------------------------------------------------
# The p_0 = ½|1 - t|² special case
# ---------------------------------------------------------------------------


def p0_closed_form(alphas, n):
    """Printed closed form ``(A_n, B_n)`` for ``ζ = 1``.

    ``A_n = Σ_{k=0}^{n} log ρ_k`` and ``B_n = (i/4) Im(α_0 - Σ_{k=1}^{n} ᾱ_{k-1} α_k)``.
    These involve ``α_0..α_n`` and describe ``ψ_{n+1}`` of the recursion, normalized to 1 at
    the origin (see :func:`p0_psi_exponent`).
    """
    alphas = as_verblunsky(alphas)
    if n >= len(alphas):
        raise ValidationError(f"n={n} needs alpha_{n}", field="n")
    A = mp.fsum(mp.log(1 - abs(alphas[k]) ** 2) for k in range(n + 1)) / 2
    s = alphas[0] - mp.fsum(mp.conj(alphas[k - 1]) * alphas[k] for k in range(1, n + 1))
    B = mp.mpc(0, mp.im(s) / 4)
    return A, B


def p0_psi_exponent(A, B, z):
    """``A{(1+z)/(1-z) - 1} + B{((1+z)/(1-z))² - 1}``."""
    z = to_mpc(z)
    u = (1 + z) / (1 - z)
    return A * (u - 1) + B * (u * u - 1)


def p0_kernel(t, z):
    """``K_0(t, z) = (t+z)/(t-z) · (t-1)²/t · z/(1-z)²``."""
    t, z = to_mpc(t), to_mpc(z)
    return (t + z) / (t - z) * (t - 1) ** 2 / t * z / (1 - z) ** 2


def modified_kernel(data, t, z):
    return (to_mpc(t) + to_mpc(z)) / (to_mpc(t) - to_mpc(z)) * q_eval(data, t) / q_eval(data, z)


# ---------------------------------------------------------------------------
# Float64 boundary values
# ---------------------------------------------------------------------------


def conjugate_function_fft(values):
    """Conjugate function of real samples on an equispaced grid (FFT multiplier ``-i sgn k``)."""
    v = np.fft.fft(values)
    n = len(values)
    k = np.fft.fftfreq(n, d=1.0 / n)
    mult = -1j * np.sign(k)
    if n % 2 == 0:
        mult[n // 2] = 0
    return np.real(np.fft.ifft(v * mult))


def boundary_grid(size):
    """Angles ``θ_j = 2π(j + ½)/size - π`` (never hitting ``θ = 0`` or ``π``)."""
    return 2 * np.pi * (np.arange(size) + 0.5) / size - np.pi


def modified_D_boundary(measure, weight, theta):
    """Float64 ``D̃(e^{iθ}) = √w · exp(i ṽ / (2p))`` with ``v = p log w`` on a uniform grid.

    On the circle ``q = p`` is real, so ``log D̃ = (v + i ṽ) / (2p)``.
    """
    theta = np.asarray(theta, dtype=float)
    logw = measure.log_density_np(theta)
    p = weight.evaluate_np(theta)
    v = np.where(np.isfinite(logw), p * logw, 0.0)
    vt = conjugate_function_fft(v)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        phase = np.where(p > 0, vt / (2 * p), 0.0)
        mod = np.exp(logw / 2)
    return mod * np.exp(1j * phase)


def psi_boundary_np(psi, theta):
    """``ψ_n`` on the circle, where it is unimodular: ``exp(i Im(R/q))``."""
    N = psi.data.N
    if N == 0:
        return np.ones_like(theta, dtype=complex)
    t = np.exp(1j * np.asarray(theta, dtype=float))
    coeffs = psi.numpy_coefficients()
    R = sum(c * t ** (k - N) for k, c in enumerate(coeffs))
    q = complex(psi.data.constantC) * np.ones_like(t)
    for zeta in psi.data.zetas:
        q = q * (t - complex(zeta)) ** 2
    q = q / t**N
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = R / q
    return np.exp(1j * np.where(np.isfinite(ratio), ratio.imag, 0.0))
