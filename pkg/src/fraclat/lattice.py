"""Periodic lattice fields, discrete Fourier analysis and the operator toolbox.

The model lives on h*Z; computationally we truncate to a periodic cell of
fixed extent L = n_points * h whose initial data decay fast enough that
wrap-around sits below the noise floor.  Sites are x_m = m h for
m = -M/2 .. M/2 - 1 and fields are stored in that site order.

Fourier convention (dimensionless frequency xi in [-pi, pi)):

    u_hat(xi_j) = sum_m u(m h) e^{-i xi_j m},      xi_j = 2 pi j / M,
    u(m h)      = (1/M) sum_j u_hat(xi_j) e^{i xi_j m},

so Parseval reads  h sum |u|^2 = (h / 2 pi) * sum_j |u_hat_j|^2 * (2 pi / M).

Operators: cell-average discretization, the coarse-to-fine interpolation
filter (spectral multiplier 2 cos^2(xi/2)), zero-padding injection, the
restriction to the even sub-lattice, piecewise-linear interpolation and
its continuum Fourier multiplier.  The norm suite covers L^p_h, H^s_h and
the mixed smoothing/maximal norms whose maximum is the contraction norm
of the solver.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np


class GridMismatchError(ValueError):
    """Operands live on incompatible grids."""


@dataclass(frozen=True)
class LatticeGrid:
    """Periodic lattice of mesh h with n_points sites (fixed extent h*n_points)."""

    h: float
    n_points: int

    def __post_init__(self) -> None:
        if self.h <= 0.0:
            raise ValueError("LatticeGrid: h must be positive")
        if self.n_points < 8 or self.n_points % 2:
            raise ValueError("LatticeGrid: n_points must be even and >= 8")

    @property
    def extent(self) -> float:
        return self.h * self.n_points

    def sites(self) -> np.ndarray:
        m = np.arange(self.n_points) - self.n_points // 2
        return m * self.h

    def freqs(self) -> np.ndarray:
        """Dimensionless DFT frequencies xi_j in [-pi, pi)."""
        j = np.arange(self.n_points) - self.n_points // 2
        return 2.0 * math.pi * j / self.n_points

    def coarse(self) -> "LatticeGrid":
        if self.n_points % 4:
            raise GridMismatchError("coarse grid needs n_points divisible by 4")
        return LatticeGrid(h=2.0 * self.h, n_points=self.n_points // 2)

    def compatible(self, other: "LatticeGrid") -> bool:
        return self.n_points == other.n_points and math.isclose(
            self.h, other.h, rel_tol=1e-12
        )


@dataclass(frozen=True)
class LatticeField:
    """Complex grid function, values in site order m = -M/2 .. M/2-1."""

    grid: LatticeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.grid.n_points,):
            raise GridMismatchError(
                f"field length {v.shape} does not match grid ({self.grid.n_points},)"
            )
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class SpectralField:
    """DFT coefficients indexed by the frequencies grid.freqs()."""

    grid: LatticeGrid
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (self.grid.n_points,):
            raise GridMismatchError("spectral length does not match grid")
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True)
class NormReport:
    """The three contraction norms and their maximum."""

    eta1: float
    eta2: float
    eta3: float

    @property
    def lam(self) -> float:
        return max(self.eta1, self.eta2, self.eta3)


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------


def dft(field: LatticeField) -> SpectralField:
    c = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(field.values)))
    return SpectralField(grid=field.grid, coeffs=c)


def idft(spec: SpectralField) -> LatticeField:
    v = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(spec.coeffs)))
    return LatticeField(grid=spec.grid, values=v)


# ---------------------------------------------------------------------------
# discretization and lattice operators
# ---------------------------------------------------------------------------

# 4-node Gauss-Legendre rule on [0, 1]
_GL4_X = np.array(
    [0.069431844202973712, 0.330009478207571868, 0.669990521792428132, 0.930568155797026288]
)
_GL4_W = np.array(
    [0.173927422568726929, 0.326072577431273071, 0.326072577431273071, 0.173927422568726929]
)


def discretize(f, grid: LatticeGrid) -> LatticeField:
    """Cell averages f_h(m h) = (1/h) int_{mh}^{(m+1)h} f, 4-node Gauss per cell."""
    x = grid.sites()[:, None] + grid.h * _GL4_X[None, :]
    vals = np.asarray(f(x), dtype=np.complex128) @ _GL4_W
    return LatticeField(grid=grid, values=vals)


def filter_pi(coarse: LatticeField) -> LatticeField:
    """Interpolation filter: even sites copied, odd sites averaged from neighbours."""
    cg = coarse.grid
    fine = LatticeGrid(h=cg.h / 2.0, n_points=2 * cg.n_points)
    v = np.empty(fine.n_points, dtype=np.complex128)
    v[::2] = coarse.values
    v[1::2] = 0.5 * (coarse.values + np.roll(coarse.values, -1))
    return LatticeField(grid=fine, values=v)


def inject(coarse: LatticeField) -> LatticeField:
    """Zero-padding injection: even sites copied, odd sites zero."""
    cg = coarse.grid
    fine = LatticeGrid(h=cg.h / 2.0, n_points=2 * cg.n_points)
    v = np.zeros(fine.n_points, dtype=np.complex128)
    v[::2] = coarse.values
    return LatticeField(grid=fine, values=v)


def restrict(fine: LatticeField) -> LatticeField:
    """Restriction to the even sub-lattice (mesh 2h)."""
    coarse = fine.grid.coarse()
    return LatticeField(grid=coarse, values=fine.values[::2].copy())


def interp_linear(field: LatticeField, query_grid: LatticeGrid) -> LatticeField:
    """Piecewise-linear interpolation p_h u sampled on a nested finer grid."""
    h, qh = field.grid.h, query_grid.h
    ratio = h / qh
    r = int(round(ratio))
    if r < 1 or abs(ratio - r) > 1e-9 * ratio:
        raise GridMismatchError(f"query mesh must refine the field mesh: ratio {ratio}")
    if query_grid.n_points != r * field.grid.n_points:
        raise GridMismatchError("query grid extent does not match the field grid")
    u = field.values
    slope = np.roll(u, -1) - u  # forward difference times h
    frac = np.arange(r) / r
    out = (u[:, None] + slope[:, None] * frac[None, :]).reshape(-1)
    return LatticeField(grid=query_grid, values=out)


def interp_multiplier(h: float, xi):
    """Continuum Fourier multiplier P_h(xi) of linear interpolation.

    P_h(xi) = int_0^h e^{-ix xi} dx + (e^{i h xi} - 1)/h * int_0^h x e^{-ix xi} dx,
    evaluated in closed form; |h xi| < 1e-4 switches to the Taylor series of
    the removable singularity.  P_h(0) = h and |P_h| <= h.
    """
    scalar = np.isscalar(xi)
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    th = h * x
    out = np.empty(x.shape, dtype=np.complex128)
    small = np.abs(th) < 1e-4
    ts = th[small]
    out[small] = h * (1.0 - ts**2 / 12.0 + ts**4 / 360.0)
    tb = th[~small]
    xb = x[~small]
    i1 = (1.0 - np.exp(-1j * tb)) / (1j * xb)
    i2 = (-h * np.exp(-1j * tb) + i1) / (1j * xb)
    out[~small] = i1 + (np.exp(1j * tb) - 1.0) / h * i2
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def norm_lp(field: LatticeField, p) -> float:
    """(h sum |u|^p)^{1/p}; sup norm for p = inf."""
    a = np.abs(field.values)
    if p == math.inf or p == "inf":
        return float(a.max(initial=0.0))
    if p < 1:
        raise ValueError("norm_lp: p must be >= 1 or inf")
    return float((field.grid.h * np.sum(a**p)) ** (1.0 / p))


def norm_sobolev(field: LatticeField, s: float) -> float:
    """H^s_h norm: quadrature of (1 + h^{-2s} |xi|^{2s}) |u_hat|^2."""
    g = field.grid
    c = dft(field).coeffs
    xi = g.freqs()
    weight = 1.0 + (np.abs(xi) / g.h) ** (2.0 * s) if s != 0.0 else np.ones_like(xi)
    val = g.h / g.n_points * np.sum(weight * np.abs(c) ** 2)
    return float(math.sqrt(val))


def _trapezoid_weights(times: np.ndarray) -> np.ndarray:
    w = np.zeros_like(times)
    dt = np.diff(times)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def norm_smoothing(traj, delta: float) -> float:
    """|| <h^{-1} grad>^delta u ||_{L^inf_h L^2_T}.

    Per snapshot the spectral multiplier (1 + |xi|/h)^delta is applied,
    then the time-L^2 per site (trapezoid rule), then the sup over sites.
    """
    times = np.asarray(traj.times, dtype=float)
    tw = _trapezoid_weights(times)
    acc = None
    for w_t, snap in zip(tw, traj.snapshots):
        g = snap.grid
        mult = (1.0 + np.abs(g.freqs()) / g.h) ** delta
        v = idft(SpectralField(grid=g, coeffs=dft(snap).coeffs * mult)).values
        a = w_t * np.abs(v) ** 2
        acc = a if acc is None else acc + a
    return float(np.sqrt(acc.max())) if acc is not None else 0.0


def norm_maximal(traj, q: float) -> float:
    """|| u ||_{L^q_h L^inf_T}: per-site sup over time, then spatial L^q_h."""
    sup = None
    grid = None
    for snap in traj.snapshots:
        a = np.abs(snap.values)
        sup = a if sup is None else np.maximum(sup, a)
        grid = snap.grid
    if sup is None:
        return 0.0
    return norm_lp(LatticeField(grid=grid, values=sup.astype(np.complex128)), q)


def lambda_norm(traj, params) -> NormReport:
    """Contraction norm: eta1 smoothing (exponent s+sigma-alpha), eta2 energy, eta3 maximal."""
    eta1 = norm_smoothing(traj, params.s + params.sigma - params.alpha)
    eta2 = max((norm_sobolev(snap, params.s) for snap in traj.snapshots), default=0.0)
    eta3 = norm_maximal(traj, 2.0 * (params.p - 1))
    return NormReport(eta1=eta1, eta2=eta2, eta3=eta3)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<dqd")  # h, n_points, t


def field_to_bytes(field: LatticeField, t: float = 0.0) -> bytes:
    head = _HEADER.pack(field.grid.h, field.grid.n_points, t)
    body = np.ascontiguousarray(field.values, dtype="<c16").tobytes()
    return head + body


def field_from_bytes(buf: bytes, offset: int = 0) -> tuple[LatticeField, float, int]:
    """Decode one field record; returns (field, t, next offset)."""
    h, n, t = _HEADER.unpack_from(buf, offset)
    start = offset + _HEADER.size
    end = start + 16 * n
    values = np.frombuffer(buf[start:end], dtype="<c16").copy()
    return LatticeField(grid=LatticeGrid(h=h, n_points=int(n)), values=values), t, end


def field_to_csv(field: LatticeField, path, t: float = 0.0) -> None:
    with open(path, "w") as fh:
        fh.write("x,re,im\n")
        for x, v in zip(field.grid.sites(), field.values):
            fh.write(f"{x:.17g},{v.real:.17g},{v.imag:.17g}\n")
