"""Generalized p-trigonometric functions.

For an exponent p > 1 the generalized arcsine is defined by the integral

    asin_p(s) = int_0^s ((p-1)/(1-t^p))^(1/p) dt,      0 <= s <= 1,

extended to [-1, 1] as an odd function.  Its value at s = 1 is the
quarter-period, and

    pi_p = 2 * int_0^1 ((p-1)/(1-t^p))^(1/p) dt

plays the role of pi.  sin_p is the inverse of asin_p on
[-pi_p/2, pi_p/2], extended to the real line by the reflection
sin_p(pi_p - x) = sin_p(x) and oddness, which makes it 2*pi_p periodic.
With this (amplitude one) normalization, u = sin_p satisfies the
initial value problem

    -(|u'|^(p-2) u')' = |u|^(p-2) u,   u(0) = 0,  u'(0) = (p-1)^(-1/p),

and differentiating the defining integral yields the first integral

    (p-1) |u'(x)|^p + |u(x)|^p = 1    for all x.

At p = 2 everything reduces to the classical sine and pi_2 = pi.

Numerics
--------
The defining integrand has an algebraic singularity ~ (1-t)^(-1/p) at
t = 1.  Integrals that reach into the singular corner are computed after
the substitution 1 - t = w^q with q = p/(p-1), which makes the integrand
bounded (the Jacobian cancels the singular factor exactly).  pi_p and
asin_p are evaluated with adaptive Gauss-Kronrod quadrature on the two
smooth pieces; repeated evaluations are served by a per-exponent table
of (s, asin_p(s)) pairs whose gaps are bridged with fixed 64-point
Gauss-Legendre rules.  sin_p inverts asin_p by bracketed root finding
(Brent) warm-started from the table, after range reduction modulo
2*pi_p; dsin_p then follows from the first integral, with the sign
determined by the quarter period.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

__all__ = ["Exponent", "pi_p", "asin_p", "sin_p", "dsin_p"]

# Number of table nodes (N intervals, N+1 nodes) and how many of the top
# intervals are anchored through the desingularized tail instead of the
# cumulative sums.
_TABLE_N = 640
_TABLE_TOP = 8

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-13, limit=200)


@dataclass(frozen=True)
class Exponent:
    """An exponent p > 1 together with its conjugate p/(p-1).

    The conjugate satisfies 1/p + 1/p_conj = 1; it is the exponent for
    which pi_{p_conj} = pi_p and it shows up wherever the inverse of the
    odd power s -> |s|^(p-2) s is needed.
    """

    p: float
    p_conj: float = field(init=False)

    def __post_init__(self):
        p = float(self.p)
        if not math.isfinite(p) or p <= 1.0:
            raise ValueError(f"exponent must be a finite real > 1, got {self.p!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "p_conj", p / (p - 1.0))


def _as_p(p) -> float:
    if isinstance(p, Exponent):
        return p.p
    return Exponent(p).p


def _one_minus_pow(t: float, p: float) -> float:
    # 1 - t**p without cancellation for t near 1.
    if t <= 0.0:
        return 1.0
    if t < 0.7:
        return 1.0 - t ** p
    return -math.expm1(p * math.log(t))


def _integrand(t: float, p: float) -> float:
    return ((p - 1.0) / _one_minus_pow(t, p)) ** (1.0 / p)


def _integrand_vec(ts: np.ndarray, p: float) -> np.ndarray:
    ts = np.asarray(ts, dtype=float)
    low = ts < 0.7
    om = np.where(low, 1.0 - np.where(low, ts, 0.0) ** p,
                  -np.expm1(p * np.log(np.where(low, 0.5, ts))))
    return ((p - 1.0) / om) ** (1.0 / p)


def _tail_integrand(w: float, p: float, pc: float) -> float:
    # Integrand of int_s^1 after 1 - t = w^pc; bounded on [0, (1-s)^(1/pc)].
    x = w ** pc
    if x < 1e-280:
        return pc * ((p - 1.0) / p) ** (1.0 / p)
    om = -math.expm1(p * math.log1p(-x))
    return ((p - 1.0) / om) ** (1.0 / p) * pc * w ** (pc - 1.0)


def _tail_quad(p: float, pc: float, s: float) -> float:
    # int_s^1 of the defining integrand, adaptively, for any s in [0, 1].
    if s >= 1.0:
        return 0.0
    w_top = (1.0 - s) ** (1.0 / pc)
    val, _ = quad(_tail_integrand, 0.0, w_top, args=(p, pc), **_QUAD_OPTS)
    return val


def _asin_quad(p: float, pc: float, s: float) -> float:
    # Adaptive evaluation of the defining integral on [0, s].
    if s <= 0.0:
        return 0.0
    if s <= 0.5:
        val, _ = quad(_integrand, 0.0, s, args=(p,), **_QUAD_OPTS)
        return val
    head, _ = quad(_integrand, 0.0, 0.5, args=(p,), **_QUAD_OPTS)
    return head + (_tail_quad(p, pc, 0.5) - _tail_quad(p, pc, s))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


def _gl_defining(p: float, a: float, b: float) -> float:
    # 64-point Gauss-Legendre for the defining integrand on [a, b], b < 1.
    if b <= a:
        return 0.0
    half = 0.5 * (b - a)
    ts = 0.5 * (a + b) + half * _GL_X
    return half * float(_GL_W @ _integrand_vec(ts, p))


def _gl_tail(p: float, pc: float, s: float) -> float:
    # 64-point Gauss-Legendre for int_s^1 in the desingularized variable.
    # Only used for s close to 1, where the transformed integrand is
    # nearly constant.
    if s >= 1.0:
        return 0.0
    w_top = (1.0 - s) ** (1.0 / pc)
    half = 0.5 * w_top
    ws = half * (_GL_X + 1.0)
    xs = ws ** pc
    om = -np.expm1(p * np.log1p(-xs))
    vals = ((p - 1.0) / om) ** (1.0 / p) * pc * ws ** (pc - 1.0)
    return half * float(_GL_W @ vals)


@dataclass(frozen=True)
class _Cache:
    p: float
    pc: float
    pi: float
    pi_half: float
    s_nodes: np.ndarray
    x_nodes: np.ndarray
    s_top: float


_cache_lock = threading.Lock()
_caches: dict[float, _Cache] = {}


def _build_cache(p: float) -> _Cache:
    pc = p / (p - 1.0)
    pi_half = _asin_quad(p, pc, 1.0)

    n = _TABLE_N
    j = np.arange(n + 1)
    s_nodes = np.sin(0.5 * math.pi * j / n)
    s_nodes[0] = 0.0
    s_nodes[-1] = 1.0

    x_nodes = np.empty(n + 1)
    x_nodes[0] = 0.0
    cut = n - _TABLE_TOP
    incr = np.array([_gl_defining(p, s_nodes[i], s_nodes[i + 1]) for i in range(cut)])
    x_nodes[1:cut + 1] = np.cumsum(incr)
    for i in range(cut + 1, n):
        x_nodes[i] = pi_half - _gl_tail(p, pc, s_nodes[i])
    x_nodes[n] = pi_half

    # The cumulative and tail-anchored routes must agree where they meet;
    # if they do not (they always have in practice), rebuild every node
    # with adaptive quadrature.
    seam = abs(x_nodes[cut] - (pi_half - _gl_tail(p, pc, s_nodes[cut])))
    if seam > 5e-13 or np.any(np.diff(x_nodes) <= 0.0):
        for i in range(1, n):
            x_nodes[i] = _asin_quad(p, pc, s_nodes[i])

    return _Cache(p=p, pc=pc, pi=2.0 * pi_half, pi_half=pi_half,
                  s_nodes=s_nodes, x_nodes=x_nodes, s_top=float(s_nodes[cut]))


def _cache_for(p: float) -> _Cache:
    c = _caches.get(p)
    if c is None:
        with _cache_lock:
            c = _caches.get(p)
            if c is None:
                c = _build_cache(p)
                _caches[p] = c
    return c


def _asin_fast(c: _Cache, s: float) -> float:
    # asin_p on [0, 1] through the table: anchor node plus a short
    # Gauss-Legendre bridge, or the desingularized tail near s = 1.
    if s <= 0.0:
        return 0.0
    if s >= 1.0:
        return c.pi_half
    if s >= c.s_top:
        return c.pi_half - _gl_tail(c.p, c.pc, s)
    j = int(np.searchsorted(c.s_nodes, s))
    a = float(c.s_nodes[j - 1])
    return float(c.x_nodes[j - 1]) + _gl_defining(c.p, a, s)


def _sin_core(c: _Cache, z: float) -> float:
    # Inverse of asin_p on the quarter period [0, pi_p/2].
    if z <= 0.0:
        return 0.0
    if z >= c.pi_half:
        return 1.0
    j = int(np.searchsorted(c.x_nodes, z))
    lo = float(c.s_nodes[j - 1])
    hi = float(c.s_nodes[j])
    flo = float(c.x_nodes[j - 1]) - z
    if flo == 0.0:
        return lo
    fhi = float(c.x_nodes[j]) - z
    if fhi == 0.0:
        return hi
    return float(brentq(lambda s: _asin_fast(c, s) - z, lo, hi,
                        xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))


def _reduce(c: _Cache, x: float) -> tuple[float, float, float]:
    # Map x to (z, sign of sin, sign of derivative) with z in [0, pi_p/2].
    y = math.fmod(x, 2.0 * c.pi)
    if y < 0.0:
        y += 2.0 * c.pi
    if y <= c.pi_half:
        return y, 1.0, 1.0
    if y <= c.pi:
        return c.pi - y, 1.0, -1.0
    if y <= 1.5 * c.pi:
        return y - c.pi, -1.0, -1.0
    return 2.0 * c.pi - y, -1.0, 1.0


def pi_p(p) -> float:
    """Return pi_p, the half period of sin_p, from the defining integral."""
    return _cache_for(_as_p(p)).pi


def asin_p(p, s: float) -> float:
    """Return the generalized arcsine of s in [-1, 1].

    The result lies in [-pi_p/2, pi_p/2] and is odd in s.
    """
    pv = _as_p(p)
    s = float(s)
    if not -1.0 <= s <= 1.0:
        raise ValueError(f"asin_p argument must lie in [-1, 1], got {s!r}")
    c = _cache_for(pv)
    return math.copysign(_asin_fast(c, abs(s)), s) if s != 0.0 else 0.0


def sin_p(p, x: float) -> float:
    """Return sin_p(x) for any real x (2*pi_p periodic, odd)."""
    c = _cache_for(_as_p(p))
    z, sgn, _ = _reduce(c, float(x))
    return sgn * _sin_core(c, z)


def dsin_p(p, x: float) -> float:
    """Return the derivative of sin_p at x.

    Evaluated through the first integral: the magnitude is
    ((1 - |sin_p(x)|^p)/(p-1))^(1/p), the sign alternates with the
    quarter period.  At x = 0 this equals (p-1)^(-1/p).
    """
    pv = _as_p(p)
    c = _cache_for(pv)
    z, _, dsgn = _reduce(c, float(x))
    s = _sin_core(c, z)
    mag = (_one_minus_pow(s, pv) / (pv - 1.0)) ** (1.0 / pv)
    return dsgn * mag
