"""Memory propagator, singular Duhamel quadrature and Picard solver.

The integral equation solved here (per Fourier mode, mu >= 0 the
dispersion multiplier) is

    u_hat(t) = E_b(i^{-b} t^b mu) u0_hat
               + i^{-b} int_0^t (t-s)^{b-1} E_{b,b}(i^{-b}(t-s)^b mu) g_hat(s) ds,

with g the (optionally filtered) power nonlinearity evaluated in physical
space.  The weakly singular kernel is integrated by product integration:
the density g_hat is piecewise linear on the uniform time grid, the
kernel is integrated exactly per interval by Gauss rules (Gauss-Jacobi
with weight (t-s)^{b-1} on the interval touching the singularity,
Gauss-Legendre elsewhere).  On a uniform grid the weights depend on the
lag n-j only, so the memory sum is a causal convolution, evaluated by
FFT along the time axis for all modes at once.

The fixed point is produced by Picard iteration over the whole time
interval, mirroring the contraction construction behind the
well-posedness theory; the residual is measured in the contraction norm
Lambda_T.  The continuum reference solver is the identical pipeline with
the multiplier |xi|^alpha and no filtering.
"""

from __future__ import annotations

import math
import cmath
from dataclasses import dataclass, field as dc_field, replace

import numpy as np
import scipy.fft as sfft
from scipy.special import roots_jacobi, roots_legendre

from .lattice import (
    GridMismatchError,
    LatticeField,
    LatticeGrid,
    SpectralField,
    discretize,
    filter_pi,
    idft,
    lambda_norm,
    restrict,
)
from .special import ml_e_grid, ml_ee_grid
from .symbol import SymbolConfig, w_on_dft_grid


class ParameterError(ValueError):
    """A model parameter violates the admissibility conditions."""


class NonContractionError(RuntimeError):
    """Picard residuals stopped decreasing: the horizon T is too large."""

    def __init__(self, message: str, residuals: list[float]):
        super().__init__(message)
        self.residuals = residuals


# ---------------------------------------------------------------------------
# parameters and grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelParams:
    """Physical/analytic parameters with the admissibility conditions enforced.

    sigma = alpha/beta is derived.  Defaults put s at its minimal value
    1/2 - 1/(2(p-1)) and delta at the lower end s + sigma - alpha of its
    admissible window, which is non-empty exactly when alpha > (sigma+1)/2.
    """

    alpha: float
    beta: float
    p: int = 3
    sign: int = 1
    s: float | None = None
    delta: float | None = None
    use_filter: bool = True

    def __post_init__(self) -> None:
        if not 1.0 < self.alpha < 2.0:
            raise ParameterError(f"alpha must lie in (1, 2): got {self.alpha}")
        if not 0.5 < self.beta <= 1.0:
            raise ParameterError(f"beta must lie in (1/2, 1]: got {self.beta}")
        if self.p < 3 or self.p % 2 == 0:
            raise ParameterError(f"p must be an odd integer >= 3: got {self.p}")
        if self.sign not in (-1, 1):
            raise ParameterError(f"sign must be +1 or -1: got {self.sign}")
        sigma = self.alpha / self.beta
        if not self.alpha > (sigma + 1.0) / 2.0:
            raise ParameterError(
                f"alpha > (sigma+1)/2 fails: {self.alpha:g} <= {(sigma + 1.0) / 2.0:g} "
                f"(sigma = alpha/beta = {sigma:g})"
            )
        s_min = 0.5 - 0.5 / (self.p - 1)
        if self.s is None:
            object.__setattr__(self, "s", s_min)
        if self.s < s_min - 1e-12:
            raise ParameterError(
                f"s >= 1/2 - 1/(2(p-1)) fails: {self.s:g} < {s_min:g}"
            )
        d_lo = self.s + sigma - self.alpha
        d_hi = sigma / 2.0 - 0.5 / (self.p - 1)
        if self.delta is None:
            object.__setattr__(self, "delta", d_lo)
        if not d_lo - 1e-12 <= self.delta < d_hi:
            raise ParameterError(
                f"delta in [s+sigma-alpha, sigma/2 - 1/(2(p-1))) fails: "
                f"{self.delta:g} not in [{d_lo:g}, {d_hi:g})"
            )

    @property
    def sigma(self) -> float:
        return self.alpha / self.beta

    @property
    def phase_unit(self) -> complex:
        """Branch convention i^{-beta} = exp(-i beta pi / 2)."""
        return cmath.exp(-1j * self.beta * math.pi / 2.0)

    def condition_margins(self) -> dict[str, float]:
        """Slack in each admissibility condition (positive = satisfied)."""
        sigma = self.sigma
        return {
            "alpha_gt_(sigma+1)/2": self.alpha - (sigma + 1.0) / 2.0,
            "s_ge_1/2-1/(2(p-1))": self.s - (0.5 - 0.5 / (self.p - 1)),
            "delta_ge_s+sigma-alpha": self.delta - (self.s + sigma - self.alpha),
            "delta_lt_sigma/2-1/(2(p-1))": (sigma / 2.0 - 0.5 / (self.p - 1)) - self.delta,
        }


@dataclass(frozen=True)
class TimeGrid:
    """Uniform nodes t_j = j T / m_steps, j = 0..m_steps."""

    T: float
    m_steps: int

    def __post_init__(self) -> None:
        if self.T <= 0.0:
            raise ValueError("TimeGrid: T must be positive")
        if self.m_steps < 2:
            raise ValueError("TimeGrid: m_steps must be >= 2")

    @property
    def dt(self) -> float:
        return self.T / self.m_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.m_steps + 1)


@dataclass
class SolutionTrajectory:
    """Snapshots on the time grid plus Picard diagnostics."""

    timegrid: TimeGrid
    snapshots: list[LatticeField]
    residuals: list[float] = dc_field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return self.timegrid.times

    @property
    def residual_ratios(self) -> list[float]:
        r = self.residuals
        return [r[i] / r[i - 1] for i in range(1, len(r)) if r[i - 1] > 0.0]


# ---------------------------------------------------------------------------
# symbol table
# ---------------------------------------------------------------------------


class SymbolTable:
    """Per-mode dispersion multipliers and cached kernel weight tables."""

    def __init__(self, grid: LatticeGrid, params: ModelParams, kind: str = "lattice",
                 ml_tol: float = 5e-8, series_terms: int = 100_000):
        if kind not in ("lattice", "continuum"):
            raise ValueError(f"symbol kind must be 'lattice' or 'continuum': {kind}")
        self.grid = grid
        self.params = params
        self.kind = kind
        self.ml_tol = ml_tol
        if kind == "lattice":
            cfg = SymbolConfig(alpha=params.alpha, series_terms=series_terms)
            wvals = w_on_dft_grid(cfg, grid.n_points)
            self.mu = wvals / grid.h**params.alpha
        else:
            self.mu = (np.abs(grid.freqs()) / grid.h) ** params.alpha
        self.mu[grid.n_points // 2] = 0.0  # zero mode exactly
        self._weights: dict[tuple[float, int], tuple[np.ndarray, np.ndarray]] = {}

    def propagator_multiplier(self, t: float) -> np.ndarray:
        """E_beta(i^{-beta} t^beta mu) for every mode."""
        z = self.params.phase_unit * (t ** self.params.beta) * self.mu.astype(np.complex128)
        return ml_e_grid(self.params.beta, z, tol=self.ml_tol)

    def propagator_table(self, timegrid: TimeGrid) -> np.ndarray:
        """(m_steps+1, n_points) multipliers across all time nodes."""
        b = self.params.beta
        tpow = timegrid.times**b
        z = self.params.phase_unit * np.multiply.outer(tpow, self.mu).astype(np.complex128)
        return ml_e_grid(b, z, tol=self.ml_tol)

    def duhamel_tables(self, timegrid: TimeGrid, mode_chunk: int = 512) -> tuple[np.ndarray, np.ndarray]:
        """Product-integration weights A, B of shape (m_steps, n_points).

        Row l-1 holds the lag-l pair: the integral of the kernel against
        the linear density over [t_j, t_{j+1}] with t_n - t_j = l dt is
        A[l-1]*g(t_j) + B[l-1]*g(t_{j+1}).
        """
        key = (timegrid.T, timegrid.m_steps)
        if key not in self._weights:
            self._weights[key] = _duhamel_weight_tables(
                timegrid, self.mu, self.params, self.ml_tol, mode_chunk
            )
        return self._weights[key]


def _duhamel_nodes(timegrid: TimeGrid, beta: float, n_nodes: int = 8):
    """Quadrature nodes/assembled weights per lag (shared across modes)."""
    M = timegrid.m_steps
    dt = timegrid.dt
    xj, wj = roots_jacobi(n_nodes, 0.0, beta - 1.0)
    xl, wl = roots_legendre(n_nodes)

    taus = np.empty((M, n_nodes))
    wfac = np.empty((M, n_nodes))
    phi_a = np.empty((M, n_nodes))
    # lag 1 touches the (t-s)^{beta-1} singularity: Gauss-Jacobi absorbs it
    taus[0] = dt * (xj + 1.0) / 2.0
    wfac[0] = (dt / 2.0) ** beta * wj
    phi_a[0] = (xj + 1.0) / 2.0
    # lags >= 2: smooth kernel, Gauss-Legendre with the explicit tau^{beta-1}
    for l in range(2, M + 1):
        t_nodes = (l - 1) * dt + dt * (xl + 1.0) / 2.0
        taus[l - 1] = t_nodes
        wfac[l - 1] = dt / 2.0 * wl * t_nodes ** (beta - 1.0)
        phi_a[l - 1] = (xl + 1.0) / 2.0
    return taus, wfac, phi_a


def duhamel_weights(timegrid: TimeGrid, mu: float, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Kernel weights for a single mode; returns (A, B), each of length m_steps.

    For target node t_n and source interval [t_j, t_{j+1}] the pair at lag
    l = n - j approximates
    int (t_n - s)^{beta-1} E_{beta,beta}(i^{-beta}(t_n-s)^{beta} mu) g(s) ds
    by A[l-1] g(t_j) + B[l-1] g(t_{j+1}) for piecewise-linear g.
    """
    if mu < 0.0:
        raise ValueError("duhamel_weights: mu must be >= 0")
    A, B = _duhamel_weight_tables(timegrid, np.array([float(mu)]), params, 5e-8, 16)
    return A[:, 0], B[:, 0]


def _duhamel_weight_tables(
    timegrid: TimeGrid,
    mus: np.ndarray,
    params: ModelParams,
    ml_tol: float,
    mode_chunk: int,
) -> tuple[np.ndarray, np.ndarray]:
    beta = params.beta
    taus, wfac, phi_a = _duhamel_nodes(timegrid, beta)
    M, n_nodes = taus.shape
    K = mus.size
    A = np.empty((M, K), dtype=np.complex128)
    B = np.empty((M, K), dtype=np.complex128)
    wa = wfac * phi_a
    wb = wfac * (1.0 - phi_a)
    tb = taus**beta
    unit = params.phase_unit
    for lo in range(0, K, mode_chunk):
        hi = min(lo + mode_chunk, K)
        z = unit * tb[:, :, None] * mus[None, None, lo:hi]
        ek = ml_ee_grid(beta, z.reshape(M * n_nodes, -1), tol=ml_tol).reshape(M, n_nodes, hi - lo)
        A[:, lo:hi] = np.einsum("li,lik->lk", wa, ek)
        B[:, lo:hi] = np.einsum("li,lik->lk", wb, ek)
    return A, B


# ---------------------------------------------------------------------------
# initial data, propagation, nonlinearity
# ---------------------------------------------------------------------------


def prepare_initial(f, grid: LatticeGrid, use_filter: bool) -> LatticeField:
    """Initial datum: filtered (discretize on 2h, then interpolate) or raw."""
    if not use_filter:
        return discretize(f, grid)
    if grid.n_points % 4:
        raise GridMismatchError("filtered data needs n_points divisible by 4")
    coarse = LatticeGrid(h=2.0 * grid.h, n_points=grid.n_points // 2)
    return filter_pi(discretize(f, coarse))


def linear_propagate(
    f_hat: SpectralField, t: float, table: SymbolTable, params: ModelParams
) -> LatticeField:
    """Apply the linear memory propagator at time t >= 0."""
    if t < 0.0:
        raise ValueError("linear_propagate: t must be >= 0")
    mult = table.propagator_multiplier(t)
    return idft(SpectralField(grid=f_hat.grid, coeffs=mult * f_hat.coeffs))


def apply_nonlinearity(field: LatticeField, params: ModelParams) -> LatticeField:
    """Signed power nonlinearity, filtered through restrict + interpolate.

    Filtered path: sign * Pi_h R_h (|u|^{p-1} u); with use_filter off the
    pointwise nonlinearity is returned as-is (failure-mode experiments).
    """
    u = field.values
    g = params.sign * np.abs(u) ** (params.p - 1) * u
    out = LatticeField(grid=field.grid, values=g)
    if params.use_filter:
        out = filter_pi(restrict(out))
    return out


def _batch_nonlinearity(U: np.ndarray, params: ModelParams) -> np.ndarray:
    """apply_nonlinearity over the rows of a (nodes, sites) array."""
    G = params.sign * np.abs(U) ** (params.p - 1) * U
    if params.use_filter:
        even = G[:, ::2]
        out = np.empty_like(G)
        out[:, ::2] = even
        out[:, 1::2] = 0.5 * (even + np.roll(even, -1, axis=1))
        return out
    return G


def _batch_dft(V: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(np.fft.fft(np.fft.ifftshift(V, axes=1), axis=1), axes=1)


def _batch_idft(C: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(C, axes=1), axis=1), axes=1)


def _memory_convolution(A: np.ndarray, B: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Causal product-integration sum D[n] = sum_{l=1..n} A[l] G[n-l] + B[l] G[n-l+1].

    The B part is convolved against the shifted density G[1:], which keeps
    the sum strictly causal (no phantom interval left of t_0).
    """
    M, K = A.shape
    P = sfft.next_fast_len(2 * M + 2)
    Apad = np.zeros((P, K), dtype=np.complex128)
    Bpad = np.zeros((P, K), dtype=np.complex128)
    Apad[1 : M + 1] = A
    Bpad[1 : M + 1] = B
    Gpad = np.zeros((P, K), dtype=np.complex128)
    Gpad[: M + 1] = G
    Gpad2 = np.zeros((P, K), dtype=np.complex128)
    Gpad2[:M] = G[1:]
    ca = sfft.ifft(sfft.fft(Apad, axis=0) * sfft.fft(Gpad, axis=0), axis=0)
    cb = sfft.ifft(sfft.fft(Bpad, axis=0) * sfft.fft(Gpad2, axis=0), axis=0)
    D = np.empty((M + 1, K), dtype=np.complex128)
    D[0] = 0.0
    D[1:] = ca[1 : M + 1] + cb[1 : M + 1]
    return D


class _ArrayTrajectory:
    """Duck-typed trajectory view over a (nodes, sites) array for the norms."""

    def __init__(self, times: np.ndarray, U: np.ndarray, grid: LatticeGrid):
        self.times = times
        self.snapshots = [LatticeField(grid=grid, values=U[i]) for i in range(U.shape[0])]


# ---------------------------------------------------------------------------
# the solver
# ---------------------------------------------------------------------------


def solve(
    params: ModelParams,
    grid: LatticeGrid,
    timegrid: TimeGrid,
    f,
    symbol_source: str = "lattice",
    tol: float = 1e-10,
    k_max: int = 60,
    nonlinear: bool = True,
    forcing=None,
    ml_tol: float = 5e-8,
    initial_field: LatticeField | None = None,
) -> SolutionTrajectory:
    """Picard construction of the solution to the memory integral equation.

    f is a callable initial profile (vectorised over ndarray); pass
    initial_field to skip the discretization step (lattice-native data).
    ``forcing`` adds a prescribed source t -> values array; combined with
    nonlinear=False it makes the density u-independent (manufactured
    time-refinement studies) and the fixed point is reached in one sweep.

    Raises NonContractionError when residuals fail to decrease on three
    consecutive sweeps, the signal that T exceeds the contraction horizon.
    """
    if initial_field is not None:
        if not initial_field.grid.compatible(grid):
            raise GridMismatchError("initial_field grid does not match solver grid")
        u0 = initial_field
    elif symbol_source == "continuum":
        u0 = discretize(f, grid)
    else:
        u0 = prepare_initial(f, grid, params.use_filter)

    table = SymbolTable(grid, params, kind=symbol_source, ml_tol=ml_tol)
    n_nodes = timegrid.m_steps + 1
    times = timegrid.times

    u0_hat = _batch_dft(u0.values[None, :])[0]
    LIN = table.propagator_table(timegrid) * u0_hat[None, :]
    lin_phys = _batch_idft(LIN)
    lin_phys[0] = u0.values  # t = 0 multiplier is exactly 1

    # the continuum reference carries no lattice filter in its nonlinearity
    run_params = replace(params, use_filter=False) if symbol_source == "continuum" else params

    def finish(U: np.ndarray, residuals: list[float]) -> SolutionTrajectory:
        snaps = [LatticeField(grid=grid, values=U[i].copy()) for i in range(n_nodes)]
        return SolutionTrajectory(timegrid=timegrid, snapshots=snaps, residuals=residuals)

    if not nonlinear and forcing is None:
        return finish(lin_phys, [])

    A, B = table.duhamel_tables(timegrid)
    unit = params.phase_unit

    force_hat = None
    if forcing is not None:
        F = np.stack([np.asarray(forcing(t), dtype=np.complex128) for t in times])
        force_hat = _batch_dft(F)

    U = lin_phys.copy()
    residuals: list[float] = []
    first_norm = None
    bad_streak = 0
    for sweep in range(k_max):
        if nonlinear:
            G = _batch_nonlinearity(U, run_params)
            G_hat = _batch_dft(G)
            if force_hat is not None:
                G_hat = G_hat + force_hat
        else:
            G_hat = force_hat
        D = _memory_convolution(A, B, G_hat)
        U_new = _batch_idft(LIN + unit * D)
        U_new[0] = u0.values  # D[0] = 0: node 0 is the datum, kept exact
        diff = _ArrayTrajectory(times, U_new - U, grid)
        res = lambda_norm(diff, params).lam
        residuals.append(res)
        if first_norm is None:
            first_norm = lambda_norm(_ArrayTrajectory(times, U_new, grid), params).lam
        U = U_new
        if forcing is not None and not nonlinear:
            break  # u-independent source: fixed point after one sweep
        if res <= tol * max(first_norm, 1e-300):
            break
        if len(residuals) >= 2 and res >= residuals[-2]:
            bad_streak += 1
            if bad_streak >= 3:
                raise NonContractionError(
                    f"Picard residuals non-decreasing for 3 sweeps "
                    f"(last {res:.3e}); shrink the horizon T = {timegrid.T:g}",
                    residuals,
                )
        else:
            bad_streak = 0
    # exhausting k_max with decreasing residuals is a legitimate exit: the
    # caller reads the quality off the residual history
    return finish(U, residuals)


def solve_continuum_reference(
    params: ModelParams,
    grid: LatticeGrid,
    timegrid: TimeGrid,
    f,
    **kwargs,
) -> SolutionTrajectory:
    """Pseudo-spectral continuum solver: multiplier |xi|^alpha, no filtering."""
    return solve(params, grid, timegrid, f, symbol_source="continuum", **kwargs)
