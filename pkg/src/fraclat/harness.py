"""Experiments: symbol properties, mass bounds, smoothing dichotomy, continuum limit.

Each run_* function turns one of the model's structural statements into a
measurement on desk-scale grids and returns a plain dict (JSON-ready)
with a "pass" flag, so the CLI can persist machine-readable reports.

The continuum study measures sup-in-time Sobolev distances between the
linearly interpolated lattice solution and a fine pseudo-spectral
reference, then fits the convergence order against the mesh; the target
order is 2 - alpha.  The smoothing experiment evolves Nyquist wave
packets under the leading-order phase exp(-i t phi_h) and compares the
growth of the smoothing quotient with and without the interpolation
filter: unfiltered packets resonate at the symbol's critical point while
filtered ones stay h-uniform.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .lattice import (
    LatticeField,
    LatticeGrid,
    dft,
    filter_pi,
    interp_linear,
    lambda_norm,
    norm_lp,
    norm_smoothing,
    norm_sobolev,
)
from .solver import (
    ModelParams,
    NonContractionError,
    SolutionTrajectory,
    SymbolTable,
    TimeGrid,
    prepare_initial,
    solve,
    solve_continuum_reference,
)
from .special import ml_e, ml_ee, ml_oracle, MLParams
from .symbol import (
    SymbolConfig,
    find_xi0,
    find_xi1,
    normalization_constant,
    normalization_constant_closed_form,
    w_eval,
    w_on_dft_grid,
    w_prime,
    w_second,
)


@dataclass(frozen=True)
class SmoothingReport:
    """Per-h smoothing quotients for the filtered and unfiltered branches."""

    h_list: list
    unfiltered: list
    filtered: list

    def __post_init__(self) -> None:
        if any(q <= 0.0 for q in list(self.unfiltered) + list(self.filtered)):
            raise ValueError("SmoothingReport: quotients must be positive")

    def growth_ratios(self) -> tuple[list, list]:
        ru = [self.unfiltered[i + 1] / self.unfiltered[i] for i in range(len(self.unfiltered) - 1)]
        rf = [self.filtered[i + 1] / self.filtered[i] for i in range(len(self.filtered) - 1)]
        return ru, rf


@dataclass(frozen=True)
class ConvergenceReport:
    """(h, error) series against the reference plus the fitted order."""

    pairs: list  # (h, err) with err = sup_t H^s distance
    fitted_order: float
    target_order: float
    lambda_errors: list
    l2_errors: list
    T_used: float
    monotone: bool
    lambda_monotone: bool

    def as_dict(self) -> dict:
        return {
            "pairs": [[h, e] for h, e in self.pairs],
            "l2_errors": [[h, e] for h, e in self.l2_errors],
            "lambda_errors": [[h, e] for h, e in self.lambda_errors],
            "fitted_order": self.fitted_order,
            "target_order": self.target_order,
            "T_used": self.T_used,
            "monotone": self.monotone,
            "lambda_monotone": self.lambda_monotone,
        }


def fit_order(pairs) -> float:
    """Least-squares slope of log(err) against log(h)."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError("fit_order: need at least 3 (h, err) pairs")
    h = np.array([p[0] for p in pairs], dtype=float)
    e = np.array([p[1] for p in pairs], dtype=float)
    if np.any(h <= 0.0) or np.any(e <= 0.0):
        raise ValueError("fit_order: entries must be positive")
    if np.ptp(h) < 1e-14 * h.max():
        raise ValueError("fit_order: degenerate input (identical h values)")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------


def gaussian_profile(amplitude: float = 1.0, width: float = 2.0, center: float = 0.0,
                     freq: float = 0.0):
    """Modulated Gaussian x -> A exp(-((x-c)/W)^2) e^{i freq x}."""

    def f(x):
        x = np.asarray(x, dtype=float)
        env = amplitude * np.exp(-(((x - center) / width) ** 2))
        return env * np.exp(1j * freq * x) if freq != 0.0 else env.astype(np.complex128)

    return f


def nyquist_packet(grid: LatticeGrid, width: float) -> LatticeField:
    """Gaussian envelope modulated by e^{i pi m}: spectrum centred at xi = pi."""
    m = np.arange(grid.n_points) - grid.n_points // 2
    x = grid.sites()
    vals = np.exp(1j * math.pi * m) * np.exp(-((x / width) ** 2))
    return LatticeField(grid=grid, values=vals)


def spectral_mass_near(field: LatticeField, center: float, halfwidth: float) -> float:
    """Fraction of spectral mass with | |xi| - center | < halfwidth."""
    c = dft(field).coeffs
    xi = field.grid.freqs()
    p = np.abs(c) ** 2
    # the +pi and -pi half-neighbourhoods are one aliased neighbourhood
    dist = np.abs(np.abs(xi) - center) if center == math.pi else np.abs(xi - center)
    return float(np.sum(p[dist < halfwidth]) / np.sum(p))


# ---------------------------------------------------------------------------
# symbol property checks
# ---------------------------------------------------------------------------


def run_symbol_checks(alpha_list, beta: float = 0.85, grid_points: int = 10_000,
                      table_points: int = 200) -> dict:
    """Grid verification of the dispersion-symbol properties, one entry per alpha.

    Each entry also carries a coarse (xi, w, w', w'', phi_h) table at h = 1
    for the CSV emitted by the `symbol` subcommand.
    """
    results = []
    for alpha in alpha_list:
        cfg = SymbolConfig(alpha=alpha)
        # derivative grids are cheap (quadrature); the w series grid is kept
        # smaller since each point sums cfg.series_terms cosines
        xs = np.linspace(1e-4, math.pi, grid_points, endpoint=False)[1:]
        xw = np.linspace(0.01, math.pi, min(grid_points, 2000))
        wv = np.asarray(w_eval(cfg, xw))
        wp = np.asarray(w_prime(cfg, xs))

        ratio = wv / xw**alpha
        sandwich = (float(ratio.min()), float(ratio.max()))

        monotone_wp = bool(np.all(wp > 0.0))

        xs2 = np.linspace(1e-3, math.pi, 2000)
        wpp = np.asarray(w_second(cfg, xs2))
        wpp_decreasing = bool(np.all(np.diff(wpp) < 0.0))
        sign_changes = int(np.count_nonzero(np.diff(np.sign(wpp)) != 0.0))

        xi0 = find_xi0(cfg)
        xi1 = find_xi1(cfg, beta)

        small = np.geomspace(1e-3, 0.1, 30)
        resid = np.abs(np.asarray(w_eval(cfg, small)) - small**alpha)
        slope = float(np.polyfit(np.log(small), np.log(resid), 1)[0])

        inner = xs < math.pi - 1e-6
        qup = wp[inner] / xs[inner] ** (alpha - 1.0)
        qlo = wp[inner] / (xs[inner] ** (alpha - 1.0) * (math.pi - xs[inner]))
        deriv_bounds = (float(qlo.min()), float(qup.max()))

        # centred finite differences vs the integral representations
        mids = np.array([0.8, 1.3, 1.9, 2.4])
        d = 1e-5
        fd1 = (np.asarray(w_eval(cfg, mids + d)) - np.asarray(w_eval(cfg, mids - d))) / (2 * d)
        fd2 = (np.asarray(w_prime(cfg, mids + d)) - np.asarray(w_prime(cfg, mids - d))) / (2 * d)
        fd_w_err = float(np.max(np.abs(fd1 - np.asarray(w_prime(cfg, mids)))))
        fd_wp_err = float(np.max(np.abs(fd2 - np.asarray(w_second(cfg, mids)))))

        c_fit = normalization_constant(cfg)
        c_closed = normalization_constant_closed_form(alpha)

        xt = np.linspace(1e-3, math.pi, table_points)
        wt = np.asarray(w_eval(cfg, xt))
        table = np.column_stack(
            [xt, wt, np.asarray(w_prime(cfg, xt)), np.asarray(w_second(cfg, xt)),
             wt ** (1.0 / beta)]  # phi_h at h = 1
        )

        entry = {
            "alpha": alpha,
            "beta": beta,
            "xi0": xi0,
            "xi1": xi1,
            "c_fit": c_fit,
            "c_closed_form": c_closed,
            "sandwich": sandwich,
            "deriv_bounds": deriv_bounds,
            "w_prime_positive": monotone_wp,
            "w_second_decreasing": wpp_decreasing,
            "w_second_sign_changes": sign_changes,
            "small_xi_slope": slope,
            "fd_w_vs_wprime": fd_w_err,
            "fd_wprime_vs_wsecond": fd_wp_err,
            "table": [list(row) for row in table],
        }
        entry["pass"] = bool(
            monotone_wp
            and wpp_decreasing
            and sign_changes == 1
            and 0.0 < xi0 < math.pi / 2.0
            and xi0 < xi1 < math.pi
            and abs(slope - 2.0) <= 0.05
            and sandwich[0] > 0.0
            and fd_w_err < 1e-6
            and fd_wp_err < 1e-6
            and abs(c_fit - c_closed) / c_closed < 1e-3
        )
        results.append(entry)
    return {"experiment": "symbol", "results": results,
            "pass": bool(all(r["pass"] for r in results))}


# ---------------------------------------------------------------------------
# mass uniformity
# ---------------------------------------------------------------------------


def _grid_for(extent: float, h: float) -> LatticeGrid:
    n = int(round(extent / h))
    if abs(n * h - extent) > 1e-9 * extent:
        raise ValueError(f"extent {extent} is not an integer multiple of h = {h}")
    return LatticeGrid(h=h, n_points=n)


def run_mass_uniformity(
    params: ModelParams,
    h_list,
    f,
    extent: float = 51.2,
    T: float = 1.0,
    n_times: int = 96,
    threshold: float = 0.05,
    workers: int = 1,
) -> dict:
    """sup_t ||L_{h,t} f_h|| / ||f_h|| across an h-sweep at fixed extent."""
    h_list = sorted(h_list, reverse=True)
    times = np.linspace(0.0, T, n_times + 1)

    def one(h: float) -> dict:
        grid = _grid_for(extent, h)
        u0 = prepare_initial(f, grid, params.use_filter)
        nrm0 = norm_lp(u0, 2)
        if nrm0 == 0.0:
            return {"h": h, "ratio": None, "skipped": "zero initial data"}
        table = SymbolTable(grid, params)
        c0 = dft(u0).coeffs
        worst = 0.0
        for t in times:
            mult = table.propagator_multiplier(float(t))
            val = math.sqrt(grid.h / grid.n_points * float(np.sum(np.abs(mult * c0) ** 2)))
            worst = max(worst, val / nrm0)
        return {"h": h, "ratio": worst}

    entries = _fan_out(one, h_list, workers)
    ratios = [e["ratio"] for e in entries if e.get("ratio") is not None]
    variation = max(ratios) / min(ratios) - 1.0 if ratios else None
    return {
        "experiment": "mass",
        "entries": entries,
        "variation": variation,
        "threshold": threshold,
        "pass": bool(variation is not None and variation < threshold),
    }


# ---------------------------------------------------------------------------
# smoothing dichotomy
# ---------------------------------------------------------------------------


def _phase_evolution(u0: LatticeField, params: ModelParams, times: np.ndarray,
                     series_terms: int = 100_000) -> SolutionTrajectory:
    """Linear evolution under the leading-order phase e^{-i t phi_h(xi)}."""
    grid = u0.grid
    cfg = SymbolConfig(alpha=params.alpha, series_terms=series_terms)
    wv = w_on_dft_grid(cfg, grid.n_points)
    phi = grid.h**-params.sigma * wv ** (1.0 / params.beta)
    c0 = dft(u0).coeffs
    snaps = []
    for t in times:
        ct = np.exp(-1j * t * phi) * c0
        v = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(ct)))
        snaps.append(LatticeField(grid=grid, values=v))
    tg = TimeGrid(T=float(times[-1]), m_steps=len(times) - 1)
    return SolutionTrajectory(timegrid=tg, snapshots=snaps)


def run_smoothing_experiment(
    params: ModelParams,
    h_list,
    extent: float = 51.2,
    T: float = 1.0,
    n_times: int = 64,
    eps: float = 0.01,
    packet_width: float | None = None,
    min_spectral_mass: float = 0.95,
    workers: int = 1,
) -> dict:
    """Filtered-vs-unfiltered smoothing quotients for Nyquist packet data.

    Q(h) = || <h^{-1} grad>^{(sigma-1)/2 - eps} u ||_{L^inf_h L^2_T} / ||u0||_{L^2_h}
    under the phase evolution only.  The unfiltered branch feeds the packet
    straight to the h-grid (spectrum on the critical point xi = pi); the
    filtered branch builds it on the 2h-grid and applies the filter.

    The default packet width is scaled per mesh, W = 20 h: the spectral
    standard deviation h/W then sits at a quarter of the 0.2 window, so
    well over 95% of the mass stays within |xi -+ pi| < 0.2 at every h.
    Pass a float to pin a fixed width instead.
    """
    h_list = sorted(h_list, reverse=True)
    delta = (params.sigma - 1.0) / 2.0 - eps
    times = np.linspace(0.0, T, n_times + 1)

    def one(h: float) -> dict:
        grid = _grid_for(extent, h)
        width = 20.0 * h if packet_width is None else packet_width
        raw = nyquist_packet(grid, width)
        mass = spectral_mass_near(raw, math.pi, 0.2)
        coarse = LatticeGrid(h=2.0 * h, n_points=grid.n_points // 2)
        filt = filter_pi(nyquist_packet(coarse, width))
        out = {"h": h, "packet_width": width, "packet_spectral_mass": mass}
        for tag, u0 in (("unfiltered", raw), ("filtered", filt)):
            traj = _phase_evolution(u0, params, times)
            out[tag] = norm_smoothing(traj, delta) / norm_lp(u0, 2)
        return out

    entries = _fan_out(one, h_list, workers)
    quotients = SmoothingReport(
        h_list=list(h_list),
        unfiltered=[e["unfiltered"] for e in entries],
        filtered=[e["filtered"] for e in entries],
    )
    ratios_unf, ratios_fil = quotients.growth_ratios()
    mass_ok = all(e["packet_spectral_mass"] >= min_spectral_mass for e in entries)
    return {
        "experiment": "smoothing",
        "h_list": list(h_list),
        "delta": delta,
        "entries": entries,
        "unfiltered_growth_ratios": ratios_unf,
        "filtered_ratios": ratios_fil,
        "packet_mass_ok": mass_ok,
        "dichotomy": bool(
            ratios_unf
            and min(ratios_unf) > max(ratios_fil)
        ),
        "pass": bool(
            mass_ok
            and all(r >= 1.5 for r in ratios_unf)
            and all(0.8 <= r <= 1.2 for r in ratios_fil)
        ),
    }


# ---------------------------------------------------------------------------
# continuum limit study
# ---------------------------------------------------------------------------


def _trajectory_errors(
    traj: SolutionTrajectory,
    ref: SolutionTrajectory,
    params: ModelParams,
) -> tuple[float, float, float]:
    """sup_t H^s, sup_t L^2 and Lambda_T distances on the reference grid."""
    ref_grid = ref.snapshots[0].grid
    diffs = []
    for snap, rsnap in zip(traj.snapshots, ref.snapshots):
        interp = interp_linear(snap, ref_grid)
        diffs.append(LatticeField(grid=ref_grid, values=interp.values - rsnap.values))
    err_s = max(norm_sobolev(d, params.s) for d in diffs)
    err_l2 = max(norm_lp(d, 2) for d in diffs)

    class _View:
        times = traj.times
        snapshots = diffs

    err_lam = lambda_norm(_View(), params).lam
    return err_s, err_l2, err_lam


def run_continuum_study(
    params: ModelParams,
    h_list,
    h_ref: float,
    f,
    extent: float = 51.2,
    T: float = 0.4,
    m_steps: int = 256,
    linear_only: bool = False,
    tol: float = 1e-10,
    ratio_cap: float = 0.5,
    max_shrink: int = 4,
    workers: int = 1,
) -> dict:
    """Mesh-refinement study against a fine continuum reference.

    T is chosen by the contraction criterion: if any Picard run fails to
    contract (or its residual ratios exceed ratio_cap), the horizon is
    shrunk and the whole sweep rerun, mirroring T(rho) -> infinity as the
    data shrinks.
    """
    h_list = sorted(h_list, reverse=True)
    if h_ref > min(h_list) / 4.0 + 1e-12:
        raise ValueError("h_ref must be at most min(h_list)/4")

    T_used = T
    for _attempt in range(max_shrink + 1):
        try:
            tg = TimeGrid(T=T_used, m_steps=m_steps)

            def run_h(h: float) -> SolutionTrajectory:
                grid = _grid_for(extent, h)
                return solve(params, grid, tg, f, nonlinear=not linear_only, tol=tol)

            trajs = _fan_out(run_h, h_list, workers)
            ref = solve_continuum_reference(
                params, _grid_for(extent, h_ref), tg, f,
                nonlinear=not linear_only, tol=tol,
            )
            all_ratios = [r for t in list(trajs) + [ref] for r in t.residual_ratios]
            if not linear_only and all_ratios and max(all_ratios) >= ratio_cap:
                raise NonContractionError(
                    f"residual ratio {max(all_ratios):.3f} >= cap {ratio_cap}",
                    [],
                )
            break
        except NonContractionError:
            T_used *= 0.6
    else:
        raise NonContractionError(
            f"no contracting horizon found down to T = {T_used:g}", []
        )

    pairs, l2_errors, lam_errors, residual_log = [], [], [], {}
    for h, traj in zip(h_list, trajs):
        err_s, err_l2, err_lam = _trajectory_errors(traj, ref, params)
        pairs.append((h, err_s))
        l2_errors.append((h, err_l2))
        lam_errors.append((h, err_lam))
        residual_log[str(h)] = traj.residuals

    if all(e > 0.0 for _, e in pairs) and len(pairs) >= 3:
        order = fit_order(pairs)
    elif all(e > 0.0 for _, e in l2_errors) and len(l2_errors) >= 3:
        order = fit_order(l2_errors)
    else:
        order = float("nan")
    errs = [e for _, e in pairs]
    lam_errs = [e for _, e in lam_errors]
    report = ConvergenceReport(
        pairs=pairs,
        fitted_order=order,
        target_order=2.0 - params.alpha,
        lambda_errors=lam_errors,
        l2_errors=l2_errors,
        T_used=T_used,
        monotone=bool(all(errs[i] > errs[i + 1] for i in range(len(errs) - 1))),
        lambda_monotone=bool(
            all(lam_errs[i] > lam_errs[i + 1] for i in range(len(lam_errs) - 1))
        ),
    )
    out = {"experiment": "continuum", "linear_only": linear_only}
    out.update(report.as_dict())
    out["residuals"] = residual_log
    out["ref_residuals"] = ref.residuals
    if linear_only:
        out["pass"] = bool(abs(order - (2.0 - params.alpha)) <= 0.3)
    else:
        out["pass"] = bool(report.monotone and report.lambda_monotone and order >= 0.2)
    return out


# ---------------------------------------------------------------------------
# Mittag-Leffler oracle sweep
# ---------------------------------------------------------------------------


def run_ml_check(
    betas=(0.6, 0.75, 0.8, 0.9),
    n_radii: int = 50,
    r_max: float = 50.0,
    tol_required: float = 1e-9,
    oracle_digits: int = 100,
) -> dict:
    """Sector-ray comparison of the fast evaluators against the series oracle."""
    results = []
    for beta in betas:
        mlp = MLParams(beta=beta)
        worst_e = worst_ee = 0.0
        sup_e = 0.0
        # descending radii: the first point builds the largest gamma table,
        # every later point reuses it
        for r in np.linspace(0.0, r_max, n_radii)[::-1]:
            z = complex(r) * cmath.exp(-1j * beta * math.pi / 2.0)
            ref_e = ml_oracle(beta, z, 1.0, digits=oracle_digits)
            ref_ee = ml_oracle(beta, z, beta, digits=oracle_digits)
            worst_e = max(worst_e, abs(ml_e(beta, z, mlp) - ref_e) / abs(ref_e))
            worst_ee = max(worst_ee, abs(ml_ee(beta, z, mlp) - ref_ee) / abs(ref_ee))
            sup_e = max(sup_e, abs(ref_e))
        results.append(
            {
                "beta": beta,
                "max_rel_err_ml_e": worst_e,
                "max_rel_err_ml_ee": worst_ee,
                "sup_|E_beta|_on_ray": sup_e,
                "pass": bool(max(worst_e, worst_ee) <= tol_required),
            }
        )
    return {
        "experiment": "ml-check",
        "n_points": len(betas) * n_radii,
        "results": results,
        "pass": bool(all(r["pass"] for r in results)),
    }


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _fan_out(fn, items, workers: int):
    """Map preserving order; thread pool when workers > 1."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
