"""CMV matrices, trace differences and the finite-rank sum rule.

The matrix is ``C = M·L`` with ``Θ_k = [[ᾱ_k, ρ_k], [ρ_k, -α_k]]``,
``L = Θ_0 ⊕ Θ_2 ⊕ ...`` and ``M = 1 ⊕ Θ_1 ⊕ Θ_3 ⊕ ...``.  In the basis
``χ_0, χ_1, ...`` of :mod:`polyszego.szego` its entry ``(k, j)`` is
``⟨zχ_j, χ_k⟩_σ``; that identity is what fixes the ordering, and it is checked
by :func:`multiplication_identity_error`.

Matrices are stored sparsely (the pattern is five-diagonal), and every trace
difference is accumulated index by index as ``(A)_{ii} - (A_0)_{ii}`` so that
far-away indices cancel exactly, which makes "stabilization in M" an exact
statement rather than a tolerance.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import mpmath as mp

from .errors import ConsistencyError, SeriesTruncationError, ValidationError
from .quadrature import integrate_circle, resolve_spec
from .szego_core import as_verblunsky, cmv_basis_values


def _theta(alphas, k):
    a = alphas.alpha(k)
    r = mp.sqrt(1 - abs(a) ** 2)
    return ((mp.conj(a), r), (r, -a))


def _block_matrix(alphas, size, offset):
    """Sparse rows of ``Θ_offset ⊕ Θ_{offset+2} ⊕ ...`` (1 in front if offset=1)."""
    rows = [dict() for _ in range(size)]
    if offset == 1:
        rows[0][0] = mp.mpc(1)
    k = offset
    while k < size:
        th = _theta(alphas, k)
        for di in range(2):
            for dj in range(2):
                if k + di < size and k + dj < size:
                    rows[k + di][k + dj] = mp.mpc(th[di][dj])
        k += 2
    return rows


def _sparse_matmul(A, B):
    out = []
    for row in A:
        acc = {}
        for l, a in row.items():
            for j, b in B[l].items():
                acc[j] = acc.get(j, 0) + a * b
        out.append(acc)
    return out


class CMVMatrix:
    """Truncated ``M×M`` CMV matrix; rows stored as sparse dicts ``j -> entry``."""

    def __init__(self, alphas, M):
        alphas = as_verblunsky(alphas)
        if M < 2:
            raise ValidationError("truncation size must be >= 2", field="M")
        self.alphas = alphas
        self.M = int(M)
        # build two larger so the truncation never splits a block product
        big = self.M + 2
        full = _sparse_matmul(_block_matrix(alphas, big, 1), _block_matrix(alphas, big, 0))
        self.rows = [{j: v for j, v in r.items() if j < self.M and v != 0} for r in full[: self.M]]
        self.cols = [dict() for _ in range(self.M)]
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                self.cols[j][i] = v
        # exact unit entries (free part of the matrix) skip the multiplication
        self._unit_rows = [{j for j, v in r.items() if v == 1} for r in self.rows]
        self._unit_cols = [{i for i, v in c.items() if v == 1} for c in self.cols]

    def entry(self, k, j):
        return self.rows[k].get(j, mp.mpc(0))

    def dense(self):
        return mp.matrix([[self.entry(k, j) for j in range(self.M)] for k in range(self.M)])

    def diagonal(self):
        return [self.entry(k, k) for k in range(self.M)]

    def bandwidth(self):
        return max((abs(i - j) for i, r in enumerate(self.rows) for j in r), default=0)

    def apply(self, v):
        """``C v`` for a sparse vector ``{index: value}``."""
        out = {}
        for j, x in v.items():
            units = self._unit_cols[j]
            for i, c in self.cols[j].items():
                term = x if i in units else c * x
                out[i] = out[i] + term if i in out else term
        return out

    def apply_left(self, v):
        """``v^T C`` for a sparse row vector."""
        out = {}
        for i, x in v.items():
            units = self._unit_rows[i]
            for j, c in self.rows[i].items():
                term = x if j in units else x * c
                out[j] = out[j] + term if j in out else term
        return out


def build_cmv(alphas, M):
    return CMVMatrix(alphas, M)


def free_cmv(M):
    return CMVMatrix([], M)


def tau_compress(A, k):
    """``τ^k(A)``: drop the first ``k`` rows and columns (``S*^k A S^k``)."""
    if isinstance(A, CMVMatrix):
        A = A.dense()
    n = A.rows if isinstance(A, mp.matrix) else len(A)
    if not 0 <= k < n:
        raise ValidationError(f"k={k} out of range for a {n}x{n} matrix", field="k")
    if isinstance(A, mp.matrix):
        return mp.matrix([[A[i, j] for j in range(k, n)] for i in range(k, n)])
    return [list(row[k:]) for row in A[k:]]


def t0(alphas):
    """``Σ_k log ρ_k``."""
    alphas = as_verblunsky(alphas)
    return mp.fsum(mp.log(1 - abs(a) ** 2) for a in alphas) / 2


def _diag_power_diffs(alphas, K, indices, M, free=True):
    """``[(C^k)_{ii} - (C_0^k)_{ii}]`` summed over ``indices`` for ``k = 1..K``.

    With ``free=False`` the ``C_0`` terms are skipped: away from the truncation
    edge ``C_0`` shifts every basis exponent by one, so ``(C_0^k)_{ii} = 0``.
    """
    C = CMVMatrix(alphas, M)
    C0 = CMVMatrix([], M)
    half = (K + 1) // 2
    out = [mp.mpc(0)] * (K + 1)
    pairs = ((C, 1), (C0, -1)) if free else ((C, 1),)
    for i in indices:
        for mat, sign in pairs:
            cols = [{i: mp.mpc(1)}]
            rows = [{i: mp.mpc(1)}]
            for _ in range(half):
                cols.append(mat.apply(cols[-1]))
                rows.append(mat.apply_left(rows[-1]))
            for k in range(1, K + 1):
                a, b = (k + 1) // 2, k // 2
                r, c = rows[a], cols[b]
                small, big = (r, c) if len(r) < len(c) else (c, r)
                val = mp.fsum(x * big[j] for j, x in small.items() if j in big)
                out[k] += sign * val
    return out


def power_trace_diffs(alphas, K):
    """``tr(C^k - C_0^k)`` for ``k = 0..K`` (entry 0 is 0), exact for the infinite matrices.

    Only indices within ``k`` steps of the nonzero coefficients can differ; the
    truncation is taken far enough that no such path reaches the edge.
    """
    alphas = as_verblunsky(alphas)
    r = alphas.rank
    if r == 0 or K == 0:
        return [mp.mpc(0)] * (K + 1)
    M = r + 2 * K + 6
    return _diag_power_diffs(alphas, K, range(min(M, r + K + 3)), M, free=False)


def _poly_trace_diff_at(P, alphas, M):
    d = len(P) - 1
    C = CMVMatrix(alphas, M)
    C0 = CMVMatrix([], M)
    total = mp.mpc(0)
    for i in range(M):
        vals = []
        for mat in (C, C0):
            v = {i: mp.mpc(1)}
            acc = P[0] if P else 0
            for k in range(1, d + 1):
                v = mat.apply(v)
                acc += P[k] * v.get(i, 0)
            vals.append(acc)
        total += vals[0] - vals[1]
    return total


@dataclass(frozen=True)
class TraceDiff:
    value: mp.mpc
    stabilized_M: int


def trace_diff(P, alphas, M=None, max_M=4096):
    """``tr(P(C) - P(C_0))`` for an analytic polynomial ``P`` (ascending coefficients).

    Starting from ``M = len(αs) + 2·deg P + 4`` (or the given ``M``) the
    truncation grows until the value is unchanged under ``M -> M + 1``; the
    smallest such ``M`` is reported.
    """
    alphas = as_verblunsky(alphas)
    P = [mp.mpc(c) for c in P]
    d = max(len(P) - 1, 0)
    if M is None:
        M = max(2, min(len(alphas), alphas.rank) + 2 * d + 4)
    prev = _poly_trace_diff_at(P, alphas, M)
    while M < max_M:
        nxt = _poly_trace_diff_at(P, alphas, M + 1)
        if nxt == prev:
            return TraceDiff(prev, M)
        prev = nxt
        M += 1
    raise ConsistencyError("trace difference did not stabilize")


def poly_trace_dense(P, alphas, M):
    """Dense reference: ``tr(P(C_M)) - tr(P(C_{0,M}))`` with full matrix products."""
    C = CMVMatrix(alphas, M).dense()
    C0 = CMVMatrix([], M).dense()
    total = mp.mpc(0)
    for mat, sign in ((C, 1), (C0, -1)):
        acc = mp.zeros(M, M)
        power = mp.eye(M)
        for k, c in enumerate(P):
            if k:
                power = power * mat
                acc += c * power
        total += sign * sum(acc[i, i] for i in range(M))
    return total


@dataclass(frozen=True)
class SumRuleReport:
    lhs: float
    rhs: float
    abs_diff: float
    stabilized_M: int
    a0_t0: float = 0.0
    trace_term: float = 0.0

    def to_json(self):
        doc = {k: (v if isinstance(v, int) else float(v)) for k, v in asdict(self).items()}
        return json.dumps(doc, sort_keys=True)


def sum_rule_check(p, alphas, spec=None):
    """Both sides of ``∫p log σ' dm = a_0 t_0 + Re tr(P(C) - P(C_0))`` for a Bernstein–Szegő σ."""
    from .measures import bernstein_szego, p_log_integral

    spec = resolve_spec(spec)
    alphas = as_verblunsky(alphas)
    with mp.workprec(spec.precision_bits):
        lhs = p_log_integral(p, bernstein_szego(alphas, spec), spec).value
        td = trace_diff(p.analytic_P, alphas)
        a0t0 = p.a0 * t0(alphas)
        rhs = a0t0 + mp.re(td.value)
        return SumRuleReport(
            lhs=lhs,
            rhs=rhs,
            abs_diff=abs(lhs - rhs),
            stabilized_M=td.stabilized_M,
            a0_t0=a0t0,
            trace_term=mp.re(td.value),
        )


# ---------------------------------------------------------------------------
# D as a trace series
# ---------------------------------------------------------------------------


def trace_series_coefficients(alphas, K):
    """Taylor coefficients of ``log D``: ``[t_0, conj tr(C - C_0), conj tr(C² - C_0²)/2, ...]``."""
    alphas = as_verblunsky(alphas)
    tr = power_trace_diffs(alphas, K)
    return [t0(alphas)] + [mp.conj(tr[k]) / k for k in range(1, K + 1)]


def _tail_estimate(coeffs, r):
    """Geometric tail bound for ``Σ_{k>K} |b_k| r^k`` from the last coefficients."""
    K = len(coeffs) - 1
    mags = [abs(c) for c in coeffs[1:]]
    if K < 4 or max(mags) == 0:
        return mp.mpf(0) if max(mags, default=0) == 0 else mp.inf
    window = mags[K // 2 :]
    nz = [(k, m) for k, m in enumerate(window, start=K // 2 + 1) if m > 0]
    if len(nz) < 2:
        return mp.mpf(0)
    # growth rate from the largest coefficients in the second half
    (k1, m1), (k2, m2) = nz[0], nz[-1]
    rate = mp.root(m2 / m1, k2 - k1)
    q = rate * r
    if q >= 1:
        return mp.inf
    return max(m for _, m in nz[-4:]) * r ** (K + 1) / (1 - q)


def trace_series_D(alphas, z, K_terms=None, tol=1e-12, max_terms=512):
    """``D(z) = exp(t_0 + Σ_{k≤K} conj tr(C^k - C_0^k)/k · z^k)``.

    ``z`` may be a number or a list of numbers (the coefficients are shared).
    Without ``K_terms`` the number of terms doubles until the geometric tail
    estimate at ``max|z|`` drops below ``tol``; with ``K_terms`` given, a tail
    estimate above ``tol`` raises :class:`SeriesTruncationError`.
    """
    alphas = as_verblunsky(alphas)
    zs = [mp.mpc(z)] if not isinstance(z, (list, tuple)) else [mp.mpc(x) for x in z]
    rmax = max(abs(x) for x in zs)
    if rmax >= 1:
        raise ValidationError("trace series needs |z| < 1", field="z")
    if alphas.rank == 0:
        vals = [mp.mpc(1)] * len(zs)
        return vals[0] if len(vals) == 1 else vals
    K = K_terms or 32
    while True:
        b = trace_series_coefficients(alphas, K)
        tail = _tail_estimate(b, rmax)
        if tail <= tol:
            break
        if K_terms is not None or K >= max_terms:
            raise SeriesTruncationError(
                f"trace series tail estimate {mp.nstr(tail, 3)} exceeds {tol} at K={K}",
                estimate=None,
                error=tail,
            )
        K *= 2
    vals = [mp.exp(mp.polyval(list(reversed(b)), x)) for x in zs]
    return vals[0] if len(vals) == 1 else vals


def multiplication_identity_error(alphas, size, spec=None, interior=None):
    """``max |⟨zχ_j, χ_k⟩_σ - C_{kj}|`` over the interior block, σ the Bernstein–Szegő measure."""
    from .measures import bernstein_szego

    spec = resolve_spec(spec)
    alphas = as_verblunsky(alphas)
    interior = size - 2 if interior is None else interior
    with mp.workprec(spec.precision_bits):
        mu = bernstein_szego(alphas, spec)

        def f(t):
            chi = cmv_basis_values(alphas, size, t)
            w = mp.exp(mu.log_density(t))
            return [
                t * chi[j] * mp.conj(chi[k]) * w for k in range(interior) for j in range(interior)
            ]

        vals = integrate_circle(f, (), spec)
        C = CMVMatrix(alphas, size + 2)
        err = mp.mpf(0)
        for k in range(interior):
            for j in range(interior):
                err = max(err, abs(vals[k * interior + j] - C.entry(k, j)))
        return err
