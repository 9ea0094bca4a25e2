"""Lattice dispersion symbol w, its derivatives and critical points.

    w(xi) = 2 sum_{n>=1} (1 - cos(n xi)) / n^{1+alpha},   alpha in (1, 2)

is the lattice stand-in for |xi|^alpha.  The series for w converges
absolutely and is summed directly (with the smooth part of the tail
restored through zeta(1+alpha), so the truncation error is only the
oscillatory remainder).  The differentiated series converge only
conditionally, so w' and w'' are evaluated through their polylogarithm
integral representations

    w'(xi)  = (2 sin xi / Gamma(alpha))   int_0^inf y^{alpha-1} e^y / (e^{2y} - 2 e^y cos xi + 1) dy
    w''(xi) = (2 / Gamma(alpha-1))        int_0^inf y^{alpha-2} (e^y cos xi - 1) / (e^{2y} - 2 e^y cos xi + 1) dy

with the endpoint singularity handled by Gauss-Jacobi nodes on [0, 1]
and the remaining smooth piece by Gauss-Laguerre.

Normalized quantities divide by c = lim w(xi)/|xi|^alpha, fitted by
Richardson extrapolation, so that w(xi) = |xi|^alpha + O(xi^2).
The phase function of the memory propagator is
phi_h(xi) = h^{-sigma} w(xi)^{1/beta}, sigma = alpha/beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_laguerre, zeta as _zeta

from .special import gamma_real


class BracketError(RuntimeError):
    """A guaranteed sign change was not found (quadrature fault)."""


class MultiplicityError(RuntimeError):
    """More sign changes detected than the phase inflection's uniqueness permits."""


@dataclass(frozen=True)
class SymbolConfig:
    """Symbol evaluation parameters for one alpha."""

    alpha: float
    series_terms: int = 100_000
    quad_nodes: int = 128
    normalize: bool = True
    beta: float | None = None

    def __post_init__(self) -> None:
        if not 1.0 < self.alpha < 2.0:
            raise ValueError(f"SymbolConfig: alpha must be in (1, 2), got {self.alpha}")
        if self.series_terms < 1_000:
            raise ValueError("SymbolConfig: series_terms must be >= 1000")
        if self.quad_nodes < 64:
            raise ValueError("SymbolConfig: quad_nodes must be >= 64")
        if self.beta is not None and not 0.0 < self.beta <= 1.0:
            raise ValueError(f"SymbolConfig: beta must be in (0, 1], got {self.beta}")

    def tail_bound(self) -> float:
        """Conservative truncation bound 4/(alpha N^alpha) of the raw series."""
        return 4.0 / (self.alpha * self.series_terms**self.alpha)


@dataclass(frozen=True)
class CriticalPoints:
    """Distinguished frequencies: w''(xi0) = 0, phi''(xi1) = 0, w'(xi2) = 0."""

    xi0: float
    xi1: float
    xi2: float = math.pi

    def __post_init__(self) -> None:
        if not 0.0 < self.xi0 < math.pi / 2.0:
            raise ValueError(f"xi0 = {self.xi0} outside (0, pi/2)")
        if not self.xi0 <= self.xi1 < math.pi:
            raise ValueError(f"xi1 = {self.xi1} outside [xi0, pi)")


# ---------------------------------------------------------------------------
# w itself
# ---------------------------------------------------------------------------

_CHUNK = 4096


@lru_cache(maxsize=16)
def _series_coeffs(alpha: float, n_terms: int) -> np.ndarray:
    n = np.arange(1, n_terms + 1, dtype=float)
    return n ** (-1.0 - alpha)


def _cosine_sum(alpha: float, n_terms: int, xi: np.ndarray) -> np.ndarray:
    """sum_{n<=N} cos(n xi)/n^{1+alpha}, chunked over n."""
    a = _series_coeffs(alpha, n_terms)
    out = np.zeros(xi.shape, dtype=float)
    comp = np.zeros_like(out)
    for start in range(0, n_terms, _CHUNK):
        n = np.arange(start + 1, min(start + _CHUNK, n_terms) + 1, dtype=float)
        part = np.cos(np.multiply.outer(xi, n)) @ a[start : start + n.size]
        # Kahan accumulation across chunks
        y = part - comp
        t = out + y
        comp = (t - out) - y
        out = t
    return out


def w_eval(cfg: SymbolConfig, xi):
    """(Normalized) dispersion symbol w on [-pi, pi], extended 2pi-periodically.

    The cosine series is truncated at cfg.series_terms and the smooth
    part of the tail is restored exactly via zeta(1+alpha); what remains
    is the oscillatory remainder, below ~2 N^{-1-alpha}/|sin(xi/2)|.
    """
    scalar = np.isscalar(xi)
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    x = np.mod(x + math.pi, 2.0 * math.pi) - math.pi
    zc = float(_zeta(1.0 + cfg.alpha))
    w = 2.0 * (zc - _cosine_sum(cfg.alpha, cfg.series_terms, np.abs(x)))
    w[np.abs(x) < 1e-300] = 0.0  # every series term vanishes at xi = 0
    w = np.maximum(w, 0.0)
    if cfg.normalize:
        w = w / normalization_constant(cfg)
    return float(w[0]) if scalar else w


def w_on_dft_grid(cfg: SymbolConfig, n_points: int) -> np.ndarray:
    """w at the DFT frequencies 2*pi*j/M, j = -M/2..M/2-1 (fftshifted order).

    Exact alias of the truncated series: cos(2*pi*n*j/M) only depends on
    n mod M, so the coefficients fold onto M bins and one FFT evaluates
    every grid point at once.
    """
    M = n_points
    a = _series_coeffs(cfg.alpha, cfg.series_terms)
    n = np.arange(1, cfg.series_terms + 1)
    bins = np.bincount(n % M, weights=a, minlength=M)
    sc = np.fft.fft(bins).real  # sum a_n cos(n xi_j), j = 0..M-1
    zc = float(_zeta(1.0 + cfg.alpha))
    w = 2.0 * (zc - sc)
    w[0] = 0.0
    w = np.maximum(np.fft.fftshift(w), 0.0)
    if cfg.normalize:
        w = w / normalization_constant(cfg)
    return w


@lru_cache(maxsize=16)
def _norm_constant(alpha: float, series_terms: int) -> float:
    cfg = SymbolConfig(alpha=alpha, series_terms=series_terms, normalize=False)
    nodes = np.array([1e-2, 5e-3, 2.5e-3])
    v = np.asarray(w_eval(cfg, nodes)) / nodes**alpha
    # w/xi^alpha = c + a xi^{2-alpha} + b xi^{4-alpha} + ...: two Richardson stages
    r1 = 2.0 ** -(2.0 - alpha)
    u = (v[1:] - r1 * v[:-1]) / (1.0 - r1)
    r2 = 2.0 ** -(4.0 - alpha)
    c = (u[1] - r2 * u[0]) / (1.0 - r2)
    return float(c)


def normalization_constant(cfg: SymbolConfig) -> float:
    """Richardson-fitted c with w(xi) = c |xi|^alpha + O(xi^2).

    Closed form for cross-checks: c = pi / (Gamma(1+alpha) sin(alpha*pi/2)).
    """
    return _norm_constant(cfg.alpha, cfg.series_terms)


def normalization_constant_closed_form(alpha: float) -> float:
    return math.pi / (gamma_real(1.0 + alpha) * math.sin(alpha * math.pi / 2.0))


# ---------------------------------------------------------------------------
# derivatives via integral representations
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _quad_rules(alpha: float, n_nodes: int):
    """Nodes/weights for both derivative integrals at one alpha."""
    n_lag = max(48, n_nodes // 2)
    xj1, wj1 = roots_jacobi(n_nodes, 0.0, alpha - 1.0)  # weight y^{alpha-1} piece
    xj2, wj2 = roots_jacobi(n_nodes, 0.0, alpha - 2.0)  # weight y^{alpha-2} piece
    vl, wl = roots_laguerre(n_lag)
    return (
        (0.5 * (xj1 + 1.0), wj1),
        (0.5 * (xj2 + 1.0), wj2),
        (vl, wl * np.exp(vl)),  # plain integral weights on [0, inf)
    )


def w_prime(cfg: SymbolConfig, xi):
    """w'(xi) on (0, pi]; positive inside, 0 at pi (and 0 at xi=0 by convention)."""
    scalar = np.isscalar(xi)
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    a = cfg.alpha
    (yj, wj), _, (vl, wl) = _quad_rules(a, cfg.quad_nodes)
    cx = np.cos(x)[:, None]

    ey = np.exp(yj)[None, :]
    g1 = ey / (ey * ey - 2.0 * ey * cx + 1.0)
    i1 = 2.0**-a * (g1 @ wj)

    y2 = 1.0 + vl
    em = np.exp(-y2)[None, :]
    g2 = (y2 ** (a - 1.0))[None, :] * em / (1.0 - 2.0 * em * cx + em * em)
    i2 = g2 @ wl

    out = 2.0 * np.sin(x) / gamma_real(a) * (i1 + i2)
    out[x <= 0.0] = 0.0  # limit value at the origin for alpha > 1
    if cfg.normalize:
        out = out / normalization_constant(cfg)
    return float(out[0]) if scalar else out


def w_second(cfg: SymbolConfig, xi):
    """w''(xi) on (0, pi]; diverges to +inf as xi -> 0+."""
    scalar = np.isscalar(xi)
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(x <= 0.0):
        raise ValueError("w_second: xi must be positive (w'' diverges at 0)")
    a = cfg.alpha
    _, (yj, wj), (vl, wl) = _quad_rules(a, cfg.quad_nodes)
    cx = np.cos(x)[:, None]

    ey = np.exp(yj)[None, :]
    g1 = (ey * cx - 1.0) / (ey * ey - 2.0 * ey * cx + 1.0)
    j1 = 2.0 ** (1.0 - a) * (g1 @ wj)

    y2 = 1.0 + vl
    em = np.exp(-y2)[None, :]
    g2 = (y2 ** (a - 2.0))[None, :] * em * (cx - em) / (1.0 - 2.0 * em * cx + em * em)
    j2 = g2 @ wl

    out = 2.0 / gamma_real(a - 1.0) * (j1 + j2)
    if cfg.normalize:
        out = out / normalization_constant(cfg)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# phase function and critical points
# ---------------------------------------------------------------------------


def phi_eval(cfg: SymbolConfig, h: float, xi, beta: float | None = None):
    """Phase phi_h(xi) = h^{-sigma} w(xi)^{1/beta} with sigma = alpha/beta."""
    b = beta if beta is not None else cfg.beta
    if b is None:
        raise ValueError("phi_eval: beta required (set SymbolConfig.beta or pass beta=)")
    if h <= 0.0:
        raise ValueError("phi_eval: h must be positive")
    sigma = cfg.alpha / b
    w = w_eval(cfg, xi)
    return h**-sigma * np.asarray(w) ** (1.0 / b) if not np.isscalar(w) else h**-sigma * w ** (1.0 / b)


def _phi_second_sign_fn(cfg: SymbolConfig, beta: float):
    """g(xi) with the sign of phi_1''(xi): (1/beta - 1) w'^2 + w w''.

    phi_1'' = w^{1/beta-2} g up to the positive factor 1/beta, so roots and
    signs agree while the evaluation stays well-conditioned.
    """

    def g(x):
        return (1.0 / beta - 1.0) * np.asarray(w_prime(cfg, x)) ** 2 + np.asarray(
            w_eval(cfg, x)
        ) * np.asarray(w_second(cfg, x))

    return g


def _bisect(fn, lo: float, hi: float, flo: float, width: float = 1e-12) -> float:
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        fm = float(fn(mid))
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_xi0(cfg: SymbolConfig, tol: float = 1e-10) -> float:
    """Unique zero of w'' in (0, pi/2), by bisection."""
    lo, hi = 0.05, math.pi / 2.0
    flo = float(w_second(cfg, lo))
    while flo <= 0.0 and lo > 1e-6:
        lo *= 0.5
        flo = float(w_second(cfg, lo))
    fhi = float(w_second(cfg, hi))
    if flo <= 0.0 or fhi >= 0.0:
        raise BracketError(
            f"w'' bracket failure on ({lo:.3g}, pi/2): w''({lo:.3g}) = {flo:.3g}, "
            f"w''(pi/2) = {fhi:.3g}"
        )
    root = _bisect(lambda x: w_second(cfg, x), lo, hi, flo)
    if abs(float(w_second(cfg, root))) > max(tol, 1e6 * 1e-12):
        raise BracketError(f"residual |w''({root})| too large after bisection")
    return root


def find_xi1(cfg: SymbolConfig, beta: float, grid_points: int = 800) -> float:
    """Unique zero of phi_1''(xi) in (xi0, pi); equals xi0 when beta = 1."""
    xi0 = find_xi0(cfg)
    if beta >= 1.0:
        return xi0  # the first summand vanishes and the equation reduces to w'' = 0
    g = _phi_second_sign_fn(cfg, beta)
    xs = np.linspace(xi0 + 1e-6, math.pi - 1e-9, grid_points)
    vals = np.asarray(g(xs))
    signs = np.sign(vals)
    changes = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    if changes.size == 0:
        raise BracketError("phi'' sign change not found on (xi0, pi)")
    if changes.size > 1:
        raise MultiplicityError(
            f"phi'' shows {changes.size} sign changes on (xi0, pi); expected exactly one"
        )
    i = changes[0]
    return _bisect(g, xs[i], xs[i + 1], vals[i])


def critical_points(cfg: SymbolConfig, beta: float) -> CriticalPoints:
    return CriticalPoints(xi0=find_xi0(cfg), xi1=find_xi1(cfg, beta))
