"""Population propagation and synthesis of measurable decay curves.

Populations over m = -1, 0, +1 evolve as dP/dt = R P under a 3x3
generator. Propagation uses the spectral decomposition (with a Pade
fallback for near-defective generators) so whole time grids are cheap.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from .orbach_singlet import TRANSITIONS, validate_rate_matrix

_POP_TOL = 1e-9
_CLAMP_TOL = 1e-9


@dataclass(frozen=True)
class PopulationState:
    """Occupation probabilities of the three ground sublevels."""

    populations: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.populations, dtype=float)
        if p.shape != (3,):
            raise ValueError("expected three populations")
        if abs(p.sum() - 1.0) > _POP_TOL:
            raise ValueError("populations must sum to 1")
        if p.min() < -_POP_TOL:
            raise ValueError("populations must be nonnegative")
        object.__setattr__(self, "populations", p)


@dataclass(frozen=True)
class DecayCurve:
    """A (time, signal) series with optional per-point uncertainty."""

    times_s: np.ndarray
    signal: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self) -> None:
        t = np.asarray(self.times_s, dtype=float)
        s = np.asarray(self.signal, dtype=float)
        if t.ndim != 1 or t.shape != s.shape:
            raise ValueError("times and signal must be 1-D and equally long")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly ascending")
        object.__setattr__(self, "times_s", t)
        object.__setattr__(self, "signal", s)
        if self.sigma is not None:
            sig = np.asarray(self.sigma, dtype=float)
            if sig.shape != t.shape:
                raise ValueError("sigma must match times in length")
            object.__setattr__(self, "sigma", sig)

    def to_csv(self, path: str | Path) -> None:
        """Write columns (time_s, signal[, sigma])."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["time_s", "signal"] + (["sigma"] if self.sigma is not None else [])
            writer.writerow(header)
            for i, (t, s) in enumerate(zip(self.times_s, self.signal)):
                row = [format(t, ".12g"), format(s, ".12g")]
                if self.sigma is not None:
                    row.append(format(self.sigma[i], ".12g"))
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path: str | Path) -> "DecayCurve":
        """Read a curve written by ``to_csv`` (header optional)."""
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append([float(x) for x in row])
                except ValueError:
                    continue  # header line
        data = np.asarray(rows, dtype=float)
        if data.ndim != 2 or data.shape[1] < 2:
            raise ValueError(f"no decay data found in {path}")
        sigma = data[:, 2] if data.shape[1] >= 3 else None
        return cls(times_s=data[:, 0], signal=data[:, 1], sigma=sigma)


def _propagator_factors(r: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigen-factorization R = V diag(lam) V^-1, or raise for defective R."""
    lam, vecs = np.linalg.eig(np.asarray(r, dtype=float))
    cond = np.linalg.cond(vecs)
    if not np.isfinite(cond) or cond > 1e10:
        raise np.linalg.LinAlgError("near-defective generator")
    return lam, vecs, np.linalg.inv(vecs)


def propagate_many(r: np.ndarray, p0: np.ndarray, times_s: np.ndarray) -> np.ndarray:
    """Populations exp(R t) P0 on a whole time grid, shape (len(t), 3)."""
    validate_rate_matrix(r)
    p0 = np.asarray(p0, dtype=float)
    times_s = np.asarray(times_s, dtype=float)
    if np.any(times_s < 0):
        raise ValueError("times must be nonnegative")
    try:
        lam, vecs, vinv = _propagator_factors(r)
        coeff = vinv @ p0
        evol = np.exp(np.outer(times_s, lam)) * coeff[None, :]
        pops = (vecs @ evol.T).T
    except np.linalg.LinAlgError:
        pops = np.stack([expm(r * t) @ p0 for t in times_s])
    pops = np.real_if_close(pops, tol=1e6).real
    worst = pops.min()
    if worst < -_CLAMP_TOL:
        warnings.warn(f"clamping negative population {worst:.3e}", stacklevel=2)
    return np.clip(pops, 0.0, None)


def propagate(r: np.ndarray, p0: PopulationState, t_s: float) -> PopulationState:
    """Propagate one state by time t; probability is conserved."""
    pops = propagate_many(r, p0.populations, np.array([float(t_s)]))[0]
    return PopulationState(populations=pops / pops.sum())


def equilibrium_state(r: np.ndarray) -> PopulationState:
    """Stationary distribution of a generator from its null space.

    A vanishing generator leaves every distribution stationary; the
    uniform one is returned in that case.
    """
    validate_rate_matrix(r)
    r = np.asarray(r, dtype=float)
    if np.abs(r).max() == 0.0:
        return PopulationState(populations=np.full(3, 1.0 / 3.0))
    _, _, vh = np.linalg.svd(r)
    null = vh[-1].real
    total = null.sum()
    if abs(total) < 1e-12:
        raise ValueError("stationary vector is not a probability distribution")
    null = null / total
    if null.min() < -1e-10:
        raise ValueError("generator has no probability-vector null space")
    null = np.clip(null, 0.0, None)
    return PopulationState(populations=null / null.sum())


def polarized_initial_state(
    r: np.ndarray, polarization: float, transition: str
) -> PopulationState:
    """Equilibrium populations, optically shifted into m=0, then inverted.

    A fraction ``polarization`` of the total population is moved into the
    m=0 sublevel on top of the thermal distribution, after which the
    populations of the measured transition's pair are swapped.
    """
    if not 0.0 <= polarization <= 1.0:
        raise ValueError("polarization must lie in [0, 1]")
    eq = equilibrium_state(r).populations
    pops = (1.0 - polarization) * eq
    pops[1] += polarization
    i, j = TRANSITIONS[transition]
    pops[[i, j]] = pops[[j, i]]
    return PopulationState(populations=pops)


def inversion_recovery_curve(
    r: np.ndarray,
    transition: str,
    polarization: float,
    times_s: np.ndarray,
) -> DecayCurve:
    """Signal of a three-pulse inversion recovery measurement.

    The signal is the population difference across the measured
    transition; its asymptote is the equilibrium difference.
    """
    p0 = polarized_initial_state(r, polarization, transition)
    pops = propagate_many(r, p0.populations, times_s)
    i, j = TRANSITIONS[transition]
    return DecayCurve(times_s=np.asarray(times_s, dtype=float), signal=pops[:, j] - pops[:, i])


def synthesize_noisy(curve: DecayCurve, relative_noise: float, seed: int) -> DecayCurve:
    """Add seeded Gaussian noise scaled to the curve's peak amplitude."""
    if relative_noise < 0:
        raise ValueError("relative noise must be nonnegative")
    if relative_noise == 0:
        return curve
    rng = np.random.default_rng(seed)
    scale = relative_noise * float(np.max(np.abs(curve.signal)))
    noisy = curve.signal + rng.normal(0.0, scale, size=curve.signal.shape)
    return DecayCurve(
        times_s=curve.times_s,
        signal=noisy,
        sigma=np.full_like(curve.signal, scale),
    )
