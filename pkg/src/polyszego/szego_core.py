"""Szegő recursion, the inverse (moment) problem, kernels and the CMV basis.

Conventions: ``Φ_{n+1} = zΦ_n - ᾱ_n Φ*_n``, ``Φ*_{n+1} = Φ*_n - α_n zΦ_n``,
orthonormal polynomials are ``φ_n = Φ_n / ∏_{k<n} ρ_k``.  Coefficient vectors
are stored in ascending order of powers.

The CMV basis uses the exponent layout ``0, -1, 1, -2, 2, ...``:

    χ_0 = 1,   χ_{2k-1} = z^{-k} φ*_{2k-1},   χ_{2k} = z^{-k} φ_{2k}.

With this layout ``⟨zχ_j, χ_k⟩`` is the matrix ``M·L`` of :mod:`polyszego.cmv`.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
import numpy as np

from ._numbers import to_mpc, to_pair
from .errors import PrecisionError, ValidationError
from .quadrature import resolve_spec


class VerblunskySeq:
    """Immutable finite sequence of Verblunsky coefficients, ``|α_k| < 1``."""

    __slots__ = ("_alphas", "_cache")

    def __init__(self, alphas=()):
        vals = tuple(to_mpc(a) for a in alphas)
        for k, a in enumerate(vals):
            if not abs(a) < 1:
                raise ValidationError(f"|alpha_{k}| = {float(abs(a))} is not < 1", field="alphas")
        object.__setattr__(self, "_alphas", vals)
        object.__setattr__(self, "_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("VerblunskySeq is immutable")

    @property
    def alphas(self):
        return self._alphas

    def __len__(self):
        return len(self._alphas)

    def __getitem__(self, k):
        return self._alphas[k]

    def __iter__(self):
        return iter(self._alphas)

    def __eq__(self, other):
        return isinstance(other, VerblunskySeq) and self._alphas == other._alphas

    def __hash__(self):
        return hash(self._alphas)

    def __repr__(self):
        return f"VerblunskySeq({[complex(a) for a in self._alphas]})"

    def alpha(self, k):
        """``α_k``, with zeros beyond the stored range."""
        return self._alphas[k] if k < len(self._alphas) else mp.mpc(0)

    def rho(self, k):
        return mp.sqrt(1 - abs(self.alpha(k)) ** 2)

    @property
    def rhos(self):
        """``ρ_k`` at the current precision (cached per precision)."""
        key = ("rhos", mp.mp.prec)
        if key not in self._cache:
            self._cache[key] = tuple(mp.sqrt(1 - abs(a) ** 2) for a in self._alphas)
        return self._cache[key]

    def padded(self, n):
        return VerblunskySeq(self._alphas + (mp.mpc(0),) * max(0, n - len(self)))

    @property
    def rank(self):
        """Index after the last nonzero coefficient."""
        r = 0
        for k, a in enumerate(self._alphas):
            if a != 0:
                r = k + 1
        return r

    def as_numpy(self):
        return np.array([complex(a) for a in self._alphas], dtype=complex)

    def to_json(self):
        return [to_pair(a) for a in self._alphas]

    @classmethod
    def from_json(cls, doc):
        return cls(doc)


def as_verblunsky(alphas):
    return alphas if isinstance(alphas, VerblunskySeq) else VerblunskySeq(alphas)


@dataclass(frozen=True)
class MonicPair:
    """Coefficient vectors (ascending) of ``Φ_n`` and ``Φ*_n``."""

    Phi: tuple
    PhiStar: tuple

    @property
    def n(self):
        return len(self.Phi) - 1

    def eval_Phi(self, z):
        return mp.polyval(list(reversed(self.Phi)), to_mpc(z))

    def eval_PhiStar(self, z):
        return mp.polyval(list(reversed(self.PhiStar)), to_mpc(z))


def reversed_conj(coeffs):
    """Coefficients of ``z^n conj(f(1/z̄))``."""
    return tuple(mp.conj(c) for c in reversed(coeffs))


def _check_n(alphas, n):
    if n < 0:
        raise ValidationError("n must be nonnegative", field="n")
    if n > len(alphas):
        raise ValidationError(f"n={n} exceeds the {len(alphas)} available coefficients", field="n")


def szego_recurse(alphas, n):
    """Monic ``Φ_n`` and ``Φ*_n`` from the recursion, as coefficient vectors."""
    alphas = as_verblunsky(alphas)
    _check_n(alphas, n)
    Phi = [mp.mpc(1)]
    Star = [mp.mpc(1)]
    for k in range(n):
        a = alphas[k]
        zPhi = [mp.mpc(0)] + Phi
        Star_ext = Star + [mp.mpc(0)]
        Phi = [x - mp.conj(a) * y for x, y in zip(zPhi, Star_ext)]
        Star = [y - a * x for x, y in zip(zPhi, Star_ext)]
    return MonicPair(tuple(Phi), tuple(Star))


def eval_phi_pair(alphas, n, z):
    """Orthonormal ``(φ_n(z), φ*_n(z))`` by the pointwise recursion."""
    alphas = as_verblunsky(alphas)
    _check_n(alphas, n)
    z = to_mpc(z)
    phi = mp.mpc(1)
    star = mp.mpc(1)
    rhos = alphas.rhos
    for k in range(n):
        a = alphas[k]
        r = rhos[k]
        zp = z * phi
        phi, star = (zp - mp.conj(a) * star) / r, (star - a * zp) / r
    return phi, star


def eval_phi_star(alphas, n, z):
    """Orthonormal ``φ*_n(z) = Φ*_n(z) / ∏_{k<n} ρ_k``, evaluated pointwise."""
    return eval_phi_pair(alphas, n, z)[1]


def eval_phi(alphas, n, z):
    return eval_phi_pair(alphas, n, z)[0]


def phi_star_table(alphas, n_list, z):
    """``{n: φ*_n(z)}`` for every ``n`` in ``n_list`` from a single recursion pass."""
    alphas = as_verblunsky(alphas)
    wanted = sorted(set(int(n) for n in n_list))
    if wanted:
        _check_n(alphas, wanted[-1])
    z = to_mpc(z)
    out = {}
    phi = star = mp.mpc(1)
    k = 0
    for n in wanted:
        while k < n:
            a = alphas[k]
            r = mp.sqrt(1 - abs(a) ** 2)
            zp = z * phi
            phi, star = (zp - mp.conj(a) * star) / r, (star - a * zp) / r
            k += 1
        out[n] = star
    return out


def phi_pair_np(alphas, n, z):
    """Vectorized float64 ``(φ_n, φ*_n)`` on an array of points."""
    a = np.asarray(alphas, dtype=complex)
    z = np.asarray(z, dtype=complex)
    phi = np.ones_like(z)
    star = np.ones_like(z)
    for k in range(n):
        ak = a[k] if k < len(a) else 0j
        r = np.sqrt(1 - abs(ak) ** 2)
        zp = z * phi
        phi, star = (zp - np.conj(ak) * star) / r, (star - ak * zp) / r
    return phi, star


def phi_star_np_table(alphas, n_list, z):
    """Float64 ``{n: φ*_n(z)}`` on an array of points, single pass."""
    a = np.asarray(alphas, dtype=complex)
    z = np.asarray(z, dtype=complex)
    phi = np.ones_like(z)
    star = np.ones_like(z)
    out = {}
    k = 0
    for n in sorted(set(int(n) for n in n_list)):
        while k < n:
            ak = a[k] if k < len(a) else 0j
            r = np.sqrt(1 - abs(ak) ** 2)
            zp = z * phi
            phi, star = (zp - np.conj(ak) * star) / r, (star - ak * zp) / r
            k += 1
        out[n] = star.copy()
    return out


# ---------------------------------------------------------------------------
# Bernstein–Szegő measures
# ---------------------------------------------------------------------------


def _bs_horner(alphas):
    """Descending coefficients of ``φ*_n`` (cached per precision) for Horner evaluation."""
    key = ("phistar_desc", mp.mp.prec)
    if key not in alphas._cache:
        pair = szego_recurse(alphas, len(alphas))
        scale = mp.fprod(alphas.rhos)
        alphas._cache[key] = [c / scale for c in reversed(pair.PhiStar)]
    return alphas._cache[key]


def bs_log_density(alphas, t):
    """``log(∏ρ_k² / |Φ*_n(t)|²) = -2 log|φ*_n(t)|`` with ``n = len(alphas)``."""
    alphas = as_verblunsky(alphas)
    star = mp.polyval(_bs_horner(alphas), to_mpc(t))
    return -2 * mp.log(abs(star))


def bs_log_density_np(alphas, theta):
    alphas = as_verblunsky(alphas)
    t = np.exp(1j * np.asarray(theta, dtype=float))
    _, star = phi_pair_np(alphas.as_numpy(), len(alphas), t)
    return -2 * np.log(np.abs(star))


def bernstein_szego_density(alphas):
    """Density ``t ↦ ∏ρ_k² / |Φ*_n(t)|²`` of the Bernstein–Szegő measure."""
    alphas = as_verblunsky(alphas)
    return lambda t: mp.exp(bs_log_density(alphas, to_mpc(t)))


# ---------------------------------------------------------------------------
# Inverse problem
# ---------------------------------------------------------------------------


def verblunsky_from_moments(c, n=None):
    """Levinson recursion: ``α_0..α_{n-1}`` from moments ``c_k = ∫ t^{-k} dσ``.

    Runs at the current mpmath precision.  Raises :class:`PrecisionError` when a
    prediction error becomes nonpositive (Toeplitz minor lost to roundoff).
    """
    c = [to_mpc(x) for x in c]
    if n is None:
        n = len(c) - 1
    if n > len(c) - 1:
        raise ValidationError(f"need {n + 1} moments, got {len(c)}", field="n")
    E = mp.re(c[0])
    if not E > 0:
        raise PrecisionError("c_0 must be positive")
    a = [mp.mpc(1)]
    out = []
    for k in range(n):
        s = mp.fsum(a[j] * mp.conj(c[j + 1]) for j in range(k + 1))
        abar = s / E
        alpha = mp.conj(abar)
        if not abs(alpha) < 1:
            raise PrecisionError(
                f"|alpha_{k}| >= 1 in the Levinson recursion; increase precision_bits"
            )
        b = [mp.conj(x) for x in reversed(a)]
        a = [(a[j - 1] if j > 0 else 0) - abar * (b[j] if j <= k else 0) for j in range(k + 2)]
        E = E * (1 - abs(alpha) ** 2)
        if not E > 0:
            raise PrecisionError(
                f"nonpositive Toeplitz minor at step {k}; increase precision_bits"
            )
        out.append(alpha)
    return VerblunskySeq(out)


def verblunsky_from_measure(measure, n, spec=None):
    """``α_0..α_{n-1}`` of ``measure`` via one moment pass and the Levinson recursion."""
    from .measures import moments

    spec = resolve_spec(spec)
    c = moments(measure, n, spec)
    with mp.workprec(spec.precision_bits):
        return verblunsky_from_moments(c, n)


def reproducing_kernel_zero(alphas, n):
    """``K_n(0,0) = Σ_{k≤n} |φ_k(0)|² = ∏_{k<n} ρ_k^{-2}``, summed term by term."""
    alphas = as_verblunsky(alphas)
    _check_n(alphas, n)
    total = mp.mpf(1)
    prod = mp.mpf(1)
    for k in range(n):
        prod *= 1 - abs(alphas[k]) ** 2
        # φ_{k+1}(0) = -ᾱ_k / ∏_{j≤k} ρ_j
        total += abs(alphas[k]) ** 2 / prod
    return total


# ---------------------------------------------------------------------------
# CMV basis
# ---------------------------------------------------------------------------


def chi_exponent(n):
    """Laurent exponent carried by ``χ_n`` in the free case: 0, -1, 1, -2, 2, ..."""
    if n < 0:
        raise ValidationError("basis index must be nonnegative", field="n")
    return -((n + 1) // 2) if n % 2 else n // 2


def chi_index(m):
    """Inverse of :func:`chi_exponent`."""
    return 2 * m if m >= 0 else -2 * m - 1


assert [chi_exponent(k) for k in range(5)] == [0, -1, 1, -2, 2]
assert all(chi_index(chi_exponent(k)) == k for k in range(64))


def cmv_laurent_basis(alphas, n, z):
    """``χ_n(z)`` in the layout of :func:`chi_exponent`."""
    alphas = as_verblunsky(alphas)
    _check_n(alphas, n)
    z = to_mpc(z)
    if n == 0:
        return mp.mpc(1)
    phi, star = eval_phi_pair(alphas, n, z)
    k = (n + 1) // 2
    if n % 2:
        return star * z ** (-k)
    return phi * z ** (-k)


def cmv_basis_values(alphas, count, z):
    """``[χ_0(z), ..., χ_{count-1}(z)]`` from one recursion pass."""
    alphas = as_verblunsky(alphas)
    z = to_mpc(z)
    out = [mp.mpc(1)]
    phi = star = mp.mpc(1)
    zinv = 1 / z
    for n in range(1, count):
        a = alphas.alpha(n - 1)
        r = mp.sqrt(1 - abs(a) ** 2)
        zp = z * phi
        phi, star = (zp - mp.conj(a) * star) / r, (star - a * zp) / r
        k = (n + 1) // 2
        out.append((star if n % 2 else phi) * zinv**k)
    return out
