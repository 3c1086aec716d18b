"""Coercion helpers between Python, JSON and mpmath numbers."""

from __future__ import annotations

import mpmath as mp


def to_mpc(x):
    """Accept complex/float/int/str/[re, im]/mpmath numbers; return ``mpc``."""
    if isinstance(x, mp.mpc):
        return x
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError(f"complex pair must have two entries, got {x!r}")
        return mp.mpc(mp.mpf(x[0]), mp.mpf(x[1]))
    if isinstance(x, str):
        return mp.mpc(complex(x.replace(" ", "").replace("i", "j")))
    if isinstance(x, complex):
        return mp.mpc(x.real, x.imag)
    return mp.mpc(x)


def to_pair(x):
    """Serialize a complex number as ``[re, im]`` of Python floats."""
    x = to_mpc(x)
    return [float(x.real), float(x.imag)]


def cplx(x):
    return complex(to_mpc(x))
