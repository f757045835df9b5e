"""Closed forms for the radial reduction of the screened Riesz kernel.

The radial velocity of a radial function reduces to a 1-D integral against

    Psi_n(q, c) = int_0^pi sin^n(mu) [A^{-(n+1)/2} - (A + c)^{-(n+1)/2}] dmu,
    A = 1 - 2 q cos(mu) + q^2,

with q = rho / r and c = (a / r)^2 (the inner integral over the kernel height
is done analytically).  For n = 2 the integral reduces to complete elliptic
integrals, for n = 3 to elementary logarithms; other n fall back to graded
Gauss-Legendre panels.  Psi_n has an integrable logarithmic singularity at
q = 1; callers must not place quadrature nodes exactly there.
"""

from __future__ import annotations

import numpy as np
from scipy import special

__all__ = ["psi", "psi_quadrature", "screening_weight", "bilinear_constant"]

_GL32 = np.polynomial.legendre.leggauss(32)

# relative size of c below which the difference of the two closed forms
# loses precision and the cancellation-free quadrature path is used instead
_SMALL_C = 1e-5


def _itilde_series(m):
    # int_0^{pi/2} sin^2 cos^2 (1 - m sin^2)^{-3/2} = (pi/16) sum_k C_k m^k,
    # C_0 = 1, C_k = C_{k-1} (k + 1/2)^2 / (k (k + 2)); converges for m < 1
    acc = np.zeros_like(m)
    term = np.ones_like(m)
    for k in range(1, 48):
        term = term * m * (k + 0.5) ** 2 / (k * (k + 2.0))
        acc += term
        if np.all(term < 1e-17 * (1.0 + acc)):
            break
    return (np.pi / 16.0) * (1.0 + acc)


def _j2(p, q, pm):
    """int_0^pi sin^2 mu (p - 2 q cos mu)^{-3/2} dmu with pm = p - 2q supplied
    in cancellation-free form."""
    pp = p + 2.0 * q
    m = np.where(q > 0.0, 4.0 * q / pp, 0.0)
    out = np.empty_like(p)
    small = m < 0.5
    if np.any(small):
        out[small] = 8.0 * pp[small] ** -1.5 * _itilde_series(m[small])
    big = ~small
    if np.any(big):
        mb = m[big]
        K = special.ellipkm1(np.maximum(pm[big] / pp[big], 5e-324))
        E = special.ellipe(mb)
        out[big] = 8.0 * pp[big] ** -1.5 * ((2.0 - mb) * K - 2.0 * E) / mb ** 2
    return out


def _t3(p, q, pm):
    """int_0^pi sin^3 mu (p - 2 q cos mu)^{-2} dmu."""
    out = np.empty_like(p)
    zero = q == 0.0
    if np.any(zero):
        out[zero] = (4.0 / 3.0) / p[zero] ** 2
    nz = ~zero
    if np.any(nz):
        pn, qn, pmn = p[nz], q[nz], pm[nz]
        x = 2.0 * qn / pn
        res = np.empty_like(pn)
        small = x < 0.5
        if np.any(small):
            ps, qs, xs = pn[small], qn[small], x[small]
            acc = np.zeros_like(ps)
            xpow = xs ** 3
            for j in range(1, 60):
                term = (ps / (2.0 * qs ** 3)) * xpow / (2 * j + 1)
                acc += term
                xpow = xpow * xs * xs
                if np.all(term < 1e-17 * acc):
                    break
            res[small] = acc
        big = ~small
        if np.any(big):
            pb, qb, pmb = pn[big], qn[big], pmn[big]
            res[big] = (pb / (4.0 * qb ** 3)) * np.log((pb + 2.0 * qb) / np.maximum(pmb, 5e-324)) \
                - 1.0 / qb ** 2
        out[nz] = res
    return out


def psi_quadrature(n: int, q, c, n_panels_hint: int = 0):
    """Psi_n by graded Gauss-Legendre panels in mu, cancellation-free bracket.

    Works for any n >= 2 and any c >= 0; used as the generic fallback and as
    an independent oracle for the closed forms.
    """
    q = np.asarray(q, dtype=float)
    c = np.broadcast_to(np.asarray(c, dtype=float), q.shape)
    e = 0.5 * (n + 1)
    out = np.empty_like(q)
    xg, wg = _GL32
    for idx in np.ndindex(q.shape):
        qi, ci = q[idx], c[idx]
        d = max(abs(1.0 - qi), 1e-9)
        brk = [0.0]
        w = min(d, np.pi / 8.0)
        while w < np.pi:
            brk.append(w)
            w *= 2.0
        brk.append(np.pi)
        brk = np.unique(np.clip(np.asarray(brk), 0.0, np.pi))
        tot = 0.0
        for lo, hi in zip(brk[:-1], brk[1:]):
            mu = 0.5 * (hi - lo) * xg + 0.5 * (hi + lo)
            wt = 0.5 * (hi - lo) * wg
            A = (1.0 - qi) ** 2 + 4.0 * qi * np.sin(0.5 * mu) ** 2
            bracket = A ** -e * (-np.expm1(-e * np.log1p(ci / A)))
            tot += float(np.sum(wt * np.sin(mu) ** n * bracket))
        out[idx] = tot
    return out


def psi(n: int, q, c):
    """Psi_n(q, c) for arrays q >= 0 and c > 0 (broadcastable).

    n = 2 and n = 3 use closed forms with series branches where the elliptic
    or logarithmic expressions cancel; elements with c below the
    cancellation threshold fall back to direct quadrature.
    """
    q = np.asarray(q, dtype=float)
    c = np.broadcast_to(np.asarray(c, dtype=float), q.shape).copy()
    p1 = 1.0 + q * q
    pm1 = (1.0 - q) ** 2
    if n == 2:
        out = _j2(p1, q, pm1) - _j2(p1 + c, q, pm1 + c)
    elif n == 3:
        out = _t3(p1, q, pm1) - _t3(p1 + c, q, pm1 + c)
    else:
        return psi_quadrature(n, q, c)
    tiny = c < _SMALL_C * (pm1 + c)
    if np.any(tiny):
        out[tiny] = psi_quadrature(n, q[tiny], c[tiny])
    return out


def screening_weight(r, params) -> np.ndarray:
    """w_a(r) = 1 - 2^{n+1} r^{n+1} / (4 r^2 + a^2)^{(n+1)/2}.

    Lies in (0, 1], equals 1 at r = 0, decreases to 0 like (n+1) a^2 / (8 r^2).
    Written in cancellation-free form for large r / a.
    """
    r = np.asarray(r, dtype=float)
    n, a = params.n, params.a
    e = 0.5 * (n + 1)
    with np.errstate(divide="ignore"):
        ratio = np.where(r > 0.0, a ** 2 / (4.0 * r ** 2), np.inf)
    return np.where(r > 0.0, -np.expm1(-e * np.log1p(ratio)), 1.0)


def bilinear_constant(n: int, delta: float) -> float:
    """(sqrt(n+1+delta) - sqrt(n))^2 / (2^{n+2} pi) * B(1/2, (n+1)/2).

    The explicit constant in the weighted bilinear lower bound; requires
    -1 < delta < 1.
    """
    if not -1.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (-1, 1), got {delta}")
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    gap = (np.sqrt(n + 1.0 + delta) - np.sqrt(float(n))) ** 2
    return float(gap / (2.0 ** (n + 2) * np.pi) * special.beta(0.5, 0.5 * (n + 1)))
