"""Nonlinear least-squares fitters for decay, Arrhenius, and orientation data.

All fitters share one damped Gauss-Newton engine (Levenberg-style
diagonal damping, multistart where the problem is multimodal,
convergence on relative parameter step < 1e-9 or 200 iterations).
Uncertainties are one-sigma values from the linearized covariance at the
optimum and are reported only for converged fits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import orbach_singlet as singlet
from .constants import CONSTANTS
from .dynamics import DecayCurve

MAX_ITERATIONS = 200
STEP_TOL = 1e-9


@dataclass
class FitResult:
    """Estimated parameters with uncertainties and convergence metadata."""

    params: dict[str, float]
    uncertainties: dict[str, float]
    rss: float
    iterations: int
    converged: bool
    dof: int
    notices: list[str] = field(default_factory=list)
    extras: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> str:
        """Structured JSON record of the fit."""
        payload = {
            "params": self.params,
            "uncertainties": self.uncertainties,
            "rss": self.rss,
            "iterations": self.iterations,
            "converged": self.converged,
            "dof": self.dof,
            "notices": self.notices,
            "extras": self.extras,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


@dataclass(frozen=True)
class ArrheniusDataset:
    """Temperature series of decay times for one sample/orientation."""

    temperatures_k: np.ndarray
    times_s: np.ndarray
    sigmas_s: np.ndarray | None = None
    label: str = ""

    def __post_init__(self) -> None:
        t = np.asarray(self.temperatures_k, dtype=float)
        y = np.asarray(self.times_s, dtype=float)
        if t.shape != y.shape or t.ndim != 1:
            raise ValueError("temperatures and times must be 1-D and equal length")
        if np.any(t <= 0) or np.any(y <= 0):
            raise ValueError("temperatures and times must be positive")
        object.__setattr__(self, "temperatures_k", t)
        object.__setattr__(self, "times_s", y)
        if self.sigmas_s is not None:
            s = np.asarray(self.sigmas_s, dtype=float)
            if s.shape != t.shape:
                raise ValueError("sigmas must match the data length")
            object.__setattr__(self, "sigmas_s", s)


def _finite_difference_jacobian(residual, x: np.ndarray, rel_step: float = 1e-6):
    """Central-difference Jacobian for residual vectors."""
    r0 = residual(x)
    jac = np.empty((r0.size, x.size))
    for k in range(x.size):
        h = rel_step * max(abs(x[k]), 1.0)
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        jac[:, k] = (residual(xp) - residual(xm)) / (2.0 * h)
    return jac


def _damped_gauss_newton(
    residual,
    x0: np.ndarray,
    jacobian=None,
    max_iter: int = MAX_ITERATIONS,
    step_tol: float = STEP_TOL,
) -> tuple[np.ndarray, float, int, bool]:
    """Minimize ||residual(x)||^2 with Levenberg-damped Gauss-Newton steps."""
    x = np.asarray(x0, dtype=float).copy()
    r = residual(x)
    if not np.all(np.isfinite(r)):
        return x, math.inf, 0, False
    rss = float(r @ r)
    lam = 1e-3
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        jac = jacobian(x) if jacobian is not None else _finite_difference_jacobian(residual, x)
        grad = jac.T @ r
        hess = jac.T @ jac
        diag = np.clip(np.diag(hess), 1e-30, None)
        accepted = False
        step = np.zeros_like(x)
        for _ in range(60):
            try:
                step = np.linalg.solve(hess + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            x_new = x + step
            r_new = residual(x_new)
            if np.all(np.isfinite(r_new)):
                rss_new = float(r_new @ r_new)
                if rss_new <= rss * (1.0 + 1e-14):
                    x, r, rss = x_new, r_new, rss_new
                    lam = max(lam * 0.3, 1e-14)
                    accepted = True
                    break
            lam *= 10.0
        if not accepted:
            converged = bool(
                np.linalg.norm(grad) <= 1e-8 * math.sqrt(max(rss, 1e-300)) + 1e-300
            )
            break
        if np.linalg.norm(step) <= step_tol * (np.linalg.norm(x) + step_tol):
            converged = True
            break
    return x, rss, iterations, converged


def _covariance(jac: np.ndarray, rss: float, dof: int, absolute: bool) -> np.ndarray:
    """Linearized parameter covariance at the optimum."""
    hess = jac.T @ jac
    try:
        cov = np.linalg.inv(hess)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(hess)
    if not absolute:
        cov = cov * (rss / dof if dof > 0 else np.nan)
    return cov


def _best_candidate(candidates):
    """Deterministic winner: lowest rss, ties broken lexicographically."""
    ordered = sorted(candidates, key=lambda c: (c[1], tuple(np.round(c[0], 12))))
    return ordered[0]


# ---------------------------------------------------------------------------
# Biexponential decay
# ---------------------------------------------------------------------------


def _exp_terms(t: np.ndarray, ltau: float) -> tuple[np.ndarray, np.ndarray]:
    """exp(-t/tau) and its log-tau sensitivity exp(-t/tau) * t/tau.

    Total functions of ltau: extreme arguments saturate instead of
    overflowing, so damped steps can probe anywhere.
    """
    with np.errstate(over="ignore", under="ignore"):
        z = t * np.exp(np.clip(-ltau, -690.0, 690.0))
        e = np.exp(-np.minimum(z, 700.0))
        sens = np.where(z > 700.0, 0.0, e * z)
    return e, sens


def _biexp_model(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    a1, a2, c, ltau1, ltau2 = x
    e1, _ = _exp_terms(t, ltau1)
    e2, _ = _exp_terms(t, ltau2)
    return a1 * e1 + a2 * e2 + c


def _biexp_jacobian(t: np.ndarray, x: np.ndarray, weights: np.ndarray) -> np.ndarray:
    a1, a2, _, ltau1, ltau2 = x
    e1, s1 = _exp_terms(t, ltau1)
    e2, s2 = _exp_terms(t, ltau2)
    cols = [e1, e2, np.ones_like(t), a1 * s1, a2 * s2]
    return np.stack(cols, axis=1) * weights[:, None]


def _mono_model(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    a, c, ltau = x
    e, _ = _exp_terms(t, ltau)
    return a * e + c


def _mono_jacobian(t: np.ndarray, x: np.ndarray, weights: np.ndarray) -> np.ndarray:
    a, _, ltau = x
    e, s = _exp_terms(t, ltau)
    return np.stack([e, np.ones_like(t), a * s], axis=1) * weights[:, None]


def _tau_start_pairs(t: np.ndarray) -> list[tuple[float, float]]:
    grid = np.geomspace(max(t[0], t[-1] * 1e-4), 2.0 * t[-1], 6)
    idx_pairs = [(0, 2), (0, 3), (1, 3), (1, 4), (2, 4), (2, 5), (3, 5), (0, 5)]
    return [(grid[i], grid[j]) for i, j in idx_pairs]


def _fit_monoexponential(
    t: np.ndarray, y: np.ndarray, weights: np.ndarray, notices: list[str]
) -> FitResult:
    def residual(x):
        return (_mono_model(t, x) - y) * weights

    candidates = []
    for tau0 in np.geomspace(max(t[0], t[-1] * 1e-4), 2.0 * t[-1], 8):
        design = np.stack([np.exp(-t / tau0), np.ones_like(t)], axis=1) * weights[:, None]
        coef, *_ = np.linalg.lstsq(design, y * weights, rcond=None)
        x0 = np.array([coef[0], coef[1], math.log(tau0)])
        res = _damped_gauss_newton(residual, x0, lambda x: _mono_jacobian(t, x, weights))
        candidates.append((res[0], res[1], res))
    x, rss, its, conv = _best_candidate(candidates)[2]
    dof = t.size - 3
    names = ["amplitude", "tau_s", "offset"]
    values = [x[0], math.exp(x[2]), x[1]]
    uncertainties: dict[str, float] = {}
    if conv:
        jac = _mono_jacobian(t, x, weights)
        cov = _covariance(jac, rss, dof, absolute=False)
        sig = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        uncertainties = {
            "amplitude": sig[0],
            "offset": sig[1],
            "tau_s": sig[2] * math.exp(x[2]),
        }
    return FitResult(
        params=dict(zip(names, values)),
        uncertainties=uncertainties,
        rss=rss,
        iterations=its,
        converged=conv,
        dof=dof,
        notices=notices,
        extras={"model": 1.0},
    )


def fit_biexponential(curve: DecayCurve, tau_degeneracy: float = 1.5) -> FitResult:
    """Fit a1 exp(-t/tau1) + a2 exp(-t/tau2) + c with tau1 <= tau2.

    Multistart over eight log-spaced tau pairs with amplitudes seeded by
    linear least squares. A fit whose time constants come out within a
    factor ``tau_degeneracy`` of each other (or whose second amplitude is
    negligible) is refit as a single exponential and flagged.
    """
    t = curve.times_s
    y = curve.signal
    if t.size < 7:
        raise ValueError("need at least 7 points for a biexponential fit")
    if np.any(t <= 0):
        raise ValueError("times must be positive")
    weights = 1.0 / curve.sigma if curve.sigma is not None else np.ones_like(y)

    def residual(x):
        return (_biexp_model(t, x) - y) * weights

    candidates = []
    for tau1, tau2 in _tau_start_pairs(t):
        design = (
            np.stack([np.exp(-t / tau1), np.exp(-t / tau2), np.ones_like(t)], axis=1)
            * weights[:, None]
        )
        coef, *_ = np.linalg.lstsq(design, y * weights, rcond=None)
        x0 = np.array([coef[0], coef[1], coef[2], math.log(tau1), math.log(tau2)])
        res = _damped_gauss_newton(residual, x0, lambda x: _biexp_jacobian(t, x, weights))
        candidates.append((res[0], res[1], res))
    x, rss, its, conv = _best_candidate(candidates)[2]

    if x[3] > x[4]:  # enforce tau1 <= tau2
        x = np.array([x[1], x[0], x[2], x[4], x[3]])
    tau1, tau2 = math.exp(x[3]), math.exp(x[4])
    amp_total = abs(x[0]) + abs(x[1])
    degenerate_tau = tau2 / tau1 < tau_degeneracy
    negligible_amp = amp_total > 0 and min(abs(x[0]), abs(x[1])) < 1e-3 * amp_total
    if degenerate_tau or negligible_amp:
        why = "tau ratio below threshold" if degenerate_tau else "negligible second amplitude"
        return _fit_monoexponential(
            t, y, weights, notices=[f"collapsed to monoexponential: {why}"]
        )

    dof = t.size - 5
    uncertainties: dict[str, float] = {}
    if conv:
        jac = _biexp_jacobian(t, x, weights)
        cov = _covariance(jac, rss, dof, absolute=curve.sigma is not None)
        sig = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        uncertainties = {
            "a1": sig[0],
            "a2": sig[1],
            "offset": sig[2],
            "tau1_s": sig[3] * tau1,
            "tau2_s": sig[4] * tau2,
        }
    return FitResult(
        params={"a1": x[0], "tau1_s": tau1, "a2": x[1], "tau2_s": tau2, "offset": x[2]},
        uncertainties=uncertainties,
        rss=rss,
        iterations=its,
        converged=conv,
        dof=dof,
        extras={"model": 2.0},
    )


# ---------------------------------------------------------------------------
# Arrhenius temperature dependence
# ---------------------------------------------------------------------------


def _arrhenius_rate(
    temps: np.ndarray, ln_rsat: float, ln_a: float, ea_mev: float
) -> np.ndarray:
    beta = CONSTANTS.mev_to_kelvin / temps
    return np.exp(ln_rsat) + np.exp(ln_a - ea_mev * beta)


def _arrhenius_initial_ea(datasets: list[ArrheniusDataset]) -> float:
    """Slope estimate from the hottest activated points of all datasets."""
    xs, ys = [], []
    for ds in datasets:
        rates = 1.0 / ds.times_s
        base = rates.min()
        mask = rates > 3.0 * base
        if mask.sum() < 2:
            order = np.argsort(ds.temperatures_k)[-3:]
            mask = np.zeros_like(rates, dtype=bool)
            mask[order] = True
        excess = np.clip(rates - base, 1e-300, None)
        xs.extend((CONSTANTS.mev_to_kelvin / ds.temperatures_k[mask]).tolist())
        ys.extend(np.log(excess[mask]).tolist())
    slope = np.polyfit(np.asarray(xs), np.asarray(ys), 1)[0]
    return float(np.clip(-slope, 0.5, 500.0))


def fit_arrhenius(
    datasets: list[ArrheniusDataset], share_ea: bool = True
) -> FitResult:
    """Fit 1/T = 1/T_sat + A exp(-Ea/kT) to one or more datasets.

    Residuals live in log-rate space (inverse-variance weighted when
    sigmas are given) so plateau and activated regions contribute on an
    equal footing. With ``share_ea`` a single activation energy is
    estimated jointly; otherwise each dataset gets its own. Parameter
    keys are suffixed with the dataset label when needed.
    """
    if not datasets:
        raise ValueError("need at least one dataset")
    labels = [ds.label or f"ds{i}" for i, ds in enumerate(datasets)]
    if len(set(labels)) != len(labels):
        raise ValueError("dataset labels must be unique")

    log_rates = [np.log(1.0 / ds.times_s) for ds in datasets]
    weights = [
        ds.times_s / ds.sigmas_s if ds.sigmas_s is not None else np.ones_like(ds.times_s)
        for ds in datasets
    ]
    n_ea = 1 if share_ea else len(datasets)

    def unpack(x):
        eas = x[:n_ea] if share_ea else x[: len(datasets)]
        rest = x[n_ea:]
        return eas, rest

    def residual(x):
        eas, rest = unpack(x)
        out = []
        for k, ds in enumerate(datasets):
            ea = eas[0] if share_ea else eas[k]
            ln_rsat, ln_a = rest[2 * k], rest[2 * k + 1]
            model = _arrhenius_rate(ds.temperatures_k, ln_rsat, ln_a, ea)
            out.append((np.log(model) - log_rates[k]) * weights[k])
        return np.concatenate(out)

    def jacobian(x):
        eas, rest = unpack(x)
        n_par = x.size
        blocks = []
        for k, ds in enumerate(datasets):
            ea = eas[0] if share_ea else eas[k]
            ln_rsat, ln_a = rest[2 * k], rest[2 * k + 1]
            beta = CONSTANTS.mev_to_kelvin / ds.temperatures_k
            sat = np.exp(ln_rsat)
            act = np.exp(ln_a - ea * beta)
            rate = sat + act
            block = np.zeros((ds.temperatures_k.size, n_par))
            ea_col = 0 if share_ea else k
            block[:, ea_col] = -beta * act / rate
            block[:, n_ea + 2 * k] = sat / rate
            block[:, n_ea + 2 * k + 1] = act / rate
            blocks.append(block * weights[k][:, None])
        return np.concatenate(blocks, axis=0)

    ea0 = _arrhenius_initial_ea(datasets)
    candidates = []
    for scale in (0.5, 1.0, 2.0):
        ea_start = ea0 * scale
        x0 = [ea_start] * n_ea
        for ds in datasets:
            rates = 1.0 / ds.times_s
            hot = int(np.argmax(ds.temperatures_k))
            beta_hot = CONSTANTS.mev_to_kelvin / ds.temperatures_k[hot]
            x0.append(math.log(rates.min()))
            x0.append(math.log(rates[hot]) + ea_start * beta_hot)
        res = _damped_gauss_newton(residual, np.asarray(x0), jacobian)
        candidates.append((res[0], res[1], res))
    x, rss, its, conv = _best_candidate(candidates)[2]

    n_points = sum(ds.temperatures_k.size for ds in datasets)
    dof = n_points - x.size
    eas, rest = unpack(x)
    params: dict[str, float] = {}
    if share_ea:
        params["ea_mev"] = float(eas[0])
    for k, label in enumerate(labels):
        if not share_ea:
            params[f"ea_mev[{label}]"] = float(eas[k])
        params[f"t_sat_s[{label}]"] = math.exp(-rest[2 * k])
        params[f"a_hz[{label}]"] = math.exp(rest[2 * k + 1])

    uncertainties: dict[str, float] = {}
    if conv:
        jac = jacobian(x)
        absolute = all(ds.sigmas_s is not None for ds in datasets)
        cov = _covariance(jac, rss, dof, absolute=absolute)
        sig = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        if share_ea:
            uncertainties["ea_mev"] = float(sig[0])
        for k, label in enumerate(labels):
            if not share_ea:
                uncertainties[f"ea_mev[{label}]"] = float(sig[k])
            uncertainties[f"t_sat_s[{label}]"] = (
                sig[n_ea + 2 * k] * math.exp(-rest[2 * k])
            )
            uncertainties[f"a_hz[{label}]"] = (
                sig[n_ea + 2 * k + 1] * math.exp(rest[2 * k + 1])
            )
    notices = []
    span_ok = all(
        ds.temperatures_k.max() / ds.temperatures_k.min() >= 2.0 for ds in datasets
    )
    if not span_ok:
        notices.append("narrow temperature span; uncertainties may be wide")
    return FitResult(
        params=params,
        uncertainties=uncertainties,
        rss=rss,
        iterations=its,
        converged=conv,
        dof=dof,
        notices=notices,
    )


# ---------------------------------------------------------------------------
# Instantaneous diffusion extrapolation
# ---------------------------------------------------------------------------


def fit_instantaneous_diffusion(points) -> FitResult:
    """Linear fit of decoherence rate versus sin^2(theta2/2).

    ``points`` holds (theta2_rad, rate_1_per_s) rows; the intercept is
    1/T2_SD and the slope 1/T2_ID. At least three distinct rotation
    angles are required and the design must not be collinear.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (theta2, rate) pairs")
    theta2, rates = pts[:, 0], pts[:, 1]
    if np.unique(np.round(theta2, 12)).size < 3:
        raise ValueError("need at least 3 distinct rotation angles")
    predictor = np.sin(theta2 / 2.0) ** 2
    if np.ptp(predictor) < 1e-12:
        raise ValueError("degenerate design: all angles give the same sin^2(theta2/2)")
    design = np.stack([np.ones_like(predictor), predictor], axis=1)
    coef, residuals, rank, _ = np.linalg.lstsq(design, rates, rcond=None)
    if rank < 2:
        raise ValueError("degenerate design matrix")
    intercept, slope = coef
    if intercept <= 0 or slope <= 0:
        raise ValueError("fit produced nonpositive rates; data inconsistent with model")
    fitted = design @ coef
    rss = float(np.sum((fitted - rates) ** 2))
    dof = rates.size - 2
    cov = _covariance(design, rss, dof, absolute=False)
    sig = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return FitResult(
        params={"t2_sd_s": 1.0 / intercept, "t2_id_s": 1.0 / slope},
        uncertainties={
            "t2_sd_s": sig[0] / intercept**2 if dof > 0 else 0.0,
            "t2_id_s": sig[1] / slope**2 if dof > 0 else 0.0,
        },
        rss=rss,
        iterations=1,
        converged=True,
        dof=dof,
    )


# ---------------------------------------------------------------------------
# Global orientation fit
# ---------------------------------------------------------------------------


def orientation_model_times(
    thetas: np.ndarray,
    c_rate: float,
    ratio: float,
    ea_mev: float,
    temperature_k: float,
    zeeman_ghz: float,
    t2_id_s: float = math.inf,
    t2_sd_s: float = math.inf,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Model (T1_a, T1_b, T2) at each angle for the singlet Orbach model."""
    zf = singlet.ZeroFieldOverlaps.from_ratio(ratio)
    p = singlet.OrbachParams(
        rate_coefficient_c=c_rate,
        activation_energy_mev=ea_mev,
        temperature_k=temperature_k,
        zeeman_freq_ghz=zeeman_ghz,
    )
    t1a, t1b, t2 = [], [], []
    for theta in np.asarray(thetas, dtype=float):
        ov = singlet.mixed_overlaps(zf, float(theta))
        r = singlet.singlet_rate_matrix(ov, p)
        a, b = singlet.labeled_relaxation_times(r, p.boltzmann_mu)
        t1a.append(a)
        t1b.append(b)
        t2.append(singlet.t2_singlet(zf, float(theta), p, t2_id_s, t2_sd_s))
    return np.asarray(t1a), np.asarray(t1b), np.asarray(t2)


def _split_points(pts) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    arr = np.asarray(pts, dtype=float)
    if arr.size == 0:
        return np.empty(0), np.empty(0), np.empty(0)
    if arr.ndim != 2 or arr.shape[1] not in (2, 3):
        raise ValueError("points must be (theta, time[, sigma]) rows")
    theta, y = arr[:, 0], arr[:, 1]
    w = y / arr[:, 2] if arr.shape[1] == 3 else np.ones_like(y)
    return theta, y, w


def global_orientation_fit(
    t1a_points,
    t1b_points,
    t2_points,
    ea_mev: float = 16.8,
    temperature_k: float = 30.0,
    zeeman_ghz: float = 9.7,
    t2_id_s: float = math.inf,
    t2_sd_s: float = math.inf,
    profile_lower_bound: bool = True,
) -> FitResult:
    """Joint fit of the rate scale C and overlap ratio to orientation data.

    Works in log-time space with inverse-variance weights when sigmas are
    present. ``t0_sq`` is fixed to 1 so ``c_rate`` absorbs the fourth
    power of the dominant overlap. The reported ratio carries a
    profile-likelihood lower bound obtained by rescanning the ratio with
    the rate scale re-optimized at each node.
    """
    th_a, y_a, w_a = _split_points(t1a_points)
    th_b, y_b, w_b = _split_points(t1b_points)
    th_2, y_2, w_2 = _split_points(t2_points)
    n_res = y_a.size + y_b.size + y_2.size
    if n_res < 4:
        raise ValueError("need at least 4 data points across the three observables")
    all_theta = np.concatenate([th_a, th_b, th_2])
    if np.degrees(all_theta.min()) > 5.0 or np.degrees(all_theta.max()) < 85.0:
        raise ValueError("orientation coverage must span at least [5 deg, 85 deg]")

    log_y = np.concatenate([np.log(y_a), np.log(y_b), np.log(y_2)])
    weights = np.concatenate([w_a, w_b, w_2])
    n_a, n_b = y_a.size, y_b.size

    def model_vector(ln_k: float, ln_ratio: float) -> np.ndarray | None:
        c_rate = math.exp(min(max(ln_k, -600.0), 600.0))
        ratio = math.exp(min(max(ln_ratio, -300.0), 300.0))
        try:
            t1a_m, _, _ = orientation_model_times(
                th_a, c_rate, ratio, ea_mev, temperature_k,
                zeeman_ghz, t2_id_s, t2_sd_s,
            )
            _, t1b_m, _ = orientation_model_times(
                th_b, c_rate, ratio, ea_mev, temperature_k,
                zeeman_ghz, t2_id_s, t2_sd_s,
            )
            _, _, t2_m = orientation_model_times(
                th_2, c_rate, ratio, ea_mev, temperature_k,
                zeeman_ghz, t2_id_s, t2_sd_s,
            )
        except (ValueError, np.linalg.LinAlgError):
            return None
        return np.concatenate([t1a_m, t1b_m, t2_m])

    def residual(x):
        model = model_vector(x[0], x[1])
        if model is None or np.any(~np.isfinite(model)) or np.any(model <= 0):
            return np.full(n_res, 1e6)
        return (np.log(model) - log_y) * weights

    candidates = []
    for ratio0 in np.geomspace(2.0, 2000.0, 8):
        probe = model_vector(0.0, math.log(ratio0))
        model_t1 = probe[: n_a + n_b] if probe is not None else np.empty(0)
        data_t1 = np.concatenate([y_a, y_b])
        good = np.isfinite(model_t1) & (model_t1 > 0) if model_t1.size else np.empty(0, bool)
        if good.sum() == 0:
            ln_k0 = 10.0
        else:
            ln_k0 = float(np.mean(np.log(model_t1[good]) - np.log(data_t1[good])))
        res = _damped_gauss_newton(residual, np.array([ln_k0, math.log(ratio0)]))
        candidates.append((res[0], res[1], res))
    x, rss, its, conv = _best_candidate(candidates)[2]

    dof = n_res - 2
    ratio_hat = math.exp(x[1])
    params = {"c_rate": math.exp(x[0]), "ratio": ratio_hat}
    uncertainties: dict[str, float] = {}
    if conv:
        jac = _finite_difference_jacobian(residual, x)
        absolute = bool(np.any(weights != 1.0))
        cov = _covariance(jac, rss, dof, absolute=absolute)
        sig = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        uncertainties = {
            "c_rate": sig[0] * math.exp(x[0]),
            "ratio": sig[1] * ratio_hat,
        }

    extras: dict[str, float] = {}
    if profile_lower_bound and conv:
        extras["ratio_lower_bound"] = _profile_ratio_lower_bound(
            residual, x, rss, dof
        )
    return FitResult(
        params=params,
        uncertainties=uncertainties,
        rss=rss,
        iterations=its,
        converged=conv,
        dof=dof,
        extras=extras,
    )


def _profile_ratio_lower_bound(
    residual, x_hat: np.ndarray, rss_hat: float, dof: int, nodes: int = 40
) -> float:
    """Smallest ratio whose profiled chi-square stays within one sigma.

    The ratio is scanned downward on a log grid; at each node the rate
    scale is re-optimized, and the bound is the interpolated crossing of
    chi^2_min + chi^2_min/dof.
    """
    threshold = rss_hat * (1.0 + 1.0 / max(dof, 1))
    grid = np.linspace(x_hat[1], math.log(1.5), nodes)
    ln_k = float(x_hat[0])
    last_ok = float(x_hat[1])
    prev_rss = rss_hat
    for ln_ratio in grid[1:]:
        profiled = lambda xk, lr=ln_ratio: residual(np.array([xk[0], lr]))
        xk, rss_k, _, _ = _damped_gauss_newton(profiled, np.array([ln_k]))
        ln_k = float(xk[0])
        if rss_k > threshold:
            frac = (
                (threshold - prev_rss) / (rss_k - prev_rss) if rss_k > prev_rss else 0.0
            )
            return float(math.exp(last_ok + frac * (ln_ratio - last_ok)))
        last_ok = float(ln_ratio)
        prev_rss = rss_k
    return float(math.exp(last_ok))
