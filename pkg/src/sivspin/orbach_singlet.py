"""Orbach relaxation through a singlet excited state.

The model couples the three S=1 ground sublevels to one spin-0 excited
state through overlap amplitudes t_m. Off-axis fields mix the zero-field
amplitudes via the phi-averaged squared Wigner rotation, spin-flip rates
scale with |t_m t_m'|^2 exp(-Ea/kT), and relaxation times follow from the
3x3 population rate matrix. Index order is m = -1, 0, +1 everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS

#: Transition selectors: level pair (indices into the m = -1, 0, +1 order).
TRANSITIONS = {"m0": (0, 1), "0p": (1, 2)}

#: Relative tolerance used when validating rate-matrix structure.
RATE_MATRIX_TOL = 1e-12


@dataclass(frozen=True)
class ZeroFieldOverlaps:
    """Squared overlap amplitudes |t0_m|^2 at zero magnetic field.

    The model assumption is tp_sq == tm_sq; helpers that rely on the
    closed-form solutions enforce it. Only ratios and the product with the
    rate coefficient are physically identifiable, so fits fix t0_sq = 1.
    """

    t0_sq: float
    tp_sq: float
    tm_sq: float

    def __post_init__(self) -> None:
        if min(self.t0_sq, self.tp_sq, self.tm_sq) < 0:
            raise ValueError("squared overlaps must be nonnegative")

    @classmethod
    def from_ratio(cls, ratio: float) -> "ZeroFieldOverlaps":
        """Overlaps with |t0/t_pm| = ratio under the t0_sq = 1 convention."""
        if ratio <= 0:
            raise ValueError("ratio must be positive")
        return cls(t0_sq=1.0, tp_sq=ratio**-2, tm_sq=ratio**-2)

    def vector(self) -> np.ndarray:
        """Overlaps ordered as m = -1, 0, +1."""
        return np.array([self.tm_sq, self.t0_sq, self.tp_sq])


@dataclass(frozen=True)
class OverlapTriple:
    """Field-mixed squared overlaps per sublevel, ordered m = -1, 0, +1."""

    tm_sq: float
    t0_sq: float
    tp_sq: float

    def vector(self) -> np.ndarray:
        return np.array([self.tm_sq, self.t0_sq, self.tp_sq])

    def total(self) -> float:
        return self.tm_sq + self.t0_sq + self.tp_sq


@dataclass(frozen=True)
class OrbachParams:
    """Rate coefficient, activation energy, and thermal conditions."""

    rate_coefficient_c: float
    activation_energy_mev: float = 16.8
    temperature_k: float = 30.0
    zeeman_freq_ghz: float = 9.7

    def __post_init__(self) -> None:
        if self.rate_coefficient_c < 0:
            raise ValueError("rate coefficient must be nonnegative")
        if self.activation_energy_mev <= 0 or self.temperature_k <= 0:
            raise ValueError("activation energy and temperature must be positive")
        if self.zeeman_freq_ghz <= 0:
            raise ValueError("Zeeman frequency must be positive")

    @property
    def thermal_factor(self) -> float:
        """exp(-Ea/kT)."""
        return CONSTANTS.arrhenius_factor(
            self.activation_energy_mev, self.temperature_k
        )

    @property
    def boltzmann_mu(self) -> float:
        """Detailed-balance factor exp(h f / k T) for the Zeeman splitting."""
        return boltzmann_factor(self.zeeman_freq_ghz, self.temperature_k)


def boltzmann_factor(zeeman_freq_ghz: float, temperature_k: float) -> float:
    """mu = exp(h f / k T) >= 1 for positive frequency."""
    if temperature_k <= 0:
        raise ValueError("temperature must be positive")
    return math.exp(zeeman_freq_ghz / (CONSTANTS.boltzmann_over_h * temperature_k))


def wigner_d1(beta: float) -> np.ndarray:
    """Rank-1 Wigner rotation matrix d^1(beta) with alpha = gamma = 0.

    Rows and columns follow the ascending m = -1, 0, +1 order; the matrix
    is real orthogonal and equals the identity at beta = 0.
    """
    c, s = math.cos(beta), math.sin(beta)
    sq2 = math.sqrt(2.0)
    return np.array(
        [
            [(1 + c) / 2, s / sq2, (1 - c) / 2],
            [-s / sq2, c, s / sq2],
            [(1 - c) / 2, -s / sq2, (1 + c) / 2],
        ],
        dtype=complex,
    )


def mixing_matrix(theta: float | np.ndarray) -> np.ndarray:
    """Phi-averaged squared rotation matrix mixing the |t^0|^2 overlaps.

    Doubly stochastic for every angle; reduces to the identity on axis.
    Accepts an array of angles, returning shape (..., 3, 3).
    """
    theta = np.asarray(theta, dtype=float)
    c4 = np.cos(theta / 2.0) ** 4
    s4 = np.sin(theta / 2.0) ** 4
    half_s2 = 0.5 * np.sin(theta) ** 2
    c2 = np.cos(theta) ** 2
    rows = np.stack(
        [
            np.stack([c4, half_s2, s4], axis=-1),
            np.stack([half_s2, c2, half_s2], axis=-1),
            np.stack([s4, half_s2, c4], axis=-1),
        ],
        axis=-2,
    )
    return rows


def mixed_overlaps(zf: ZeroFieldOverlaps, theta: float) -> OverlapTriple:
    """Apply the angular mixing to zero-field overlaps; total weight conserved."""
    mixed = mixing_matrix(float(theta)) @ zf.vector()
    return OverlapTriple(tm_sq=float(mixed[0]), t0_sq=float(mixed[1]), tp_sq=float(mixed[2]))


def _rate_matrix_from_products(
    overlap_products: np.ndarray, mu: float, prefactor: float
) -> np.ndarray:
    """Generator with off-diagonals prefactor * mu^(m-m') * products[m, m']."""
    m = np.array([-1.0, 0.0, 1.0])
    powers = mu ** (m[:, None] - m[None, :])
    rates = prefactor * powers * overlap_products
    np.fill_diagonal(rates, 0.0)
    np.fill_diagonal(rates, -rates.sum(axis=0))
    return rates


def singlet_rate_matrix(
    ov: OverlapTriple, p: OrbachParams, mu: float | None = None
) -> np.ndarray:
    """3x3 population-transfer generator for the singlet Orbach channel.

    Entry (m, m') for m != m' is C mu^(m-m') |t_m|^2 |t_m'|^2 exp(-Ea/kT):
    the rate into m from m'. Diagonals enforce zero column sums, which
    together with the mu powers gives detailed balance. ``mu`` overrides
    the Boltzmann factor implied by the parameters (e.g. 1.0 to compare
    against the closed-form solutions).
    """
    t = ov.vector()
    return _rate_matrix_from_products(
        np.outer(t, t),
        p.boltzmann_mu if mu is None else mu,
        p.rate_coefficient_c * p.thermal_factor,
    )


def stationary_weights(mu: float) -> np.ndarray:
    """Normalized stationary distribution (mu^-2, 1, mu^2)/Z of the generators.

    This is the detailed-balance fixed point implied by the mu^(m-m') rate
    asymmetry convention used by both rate-matrix builders.
    """
    w = np.array([mu**-2, 1.0, mu**2])
    return w / w.sum()


def validate_rate_matrix(r: np.ndarray, tol: float = RATE_MATRIX_TOL) -> None:
    """Check generator structure: nonnegative off-diagonals, zero column sums."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise ValueError("rate matrix must be 3x3")
    if not np.all(np.isfinite(r)):
        raise ValueError("rate matrix has non-finite entries")
    off = r[~np.eye(3, dtype=bool)]
    if np.any(off < -tol * max(np.abs(r).max(), 1.0)):
        raise ValueError("negative off-diagonal rate")
    scale = max(np.abs(r).max(), 1.0)
    if np.abs(r.sum(axis=0)).max() > 10 * tol * scale:
        raise ValueError("column sums deviate from zero")


def decay_eigenvalues(r: np.ndarray) -> np.ndarray:
    """The two decaying eigenvalues of a 3x3 generator, ascending.

    One eigenvalue of a conservative generator is always (numerically)
    zero; it is identified as the one closest to zero and removed.
    """
    r = np.asarray(r, dtype=float)
    eigvals = np.linalg.eigvals(r)
    if np.abs(eigvals.imag).max() > 1e-8 * max(np.abs(eigvals).max(), 1.0):
        raise ValueError("rate matrix has complex eigenvalues beyond tolerance")
    eigvals = np.sort(eigvals.real)
    zero_idx = int(np.argmin(np.abs(eigvals)))
    return np.delete(eigvals, zero_idx)


def relaxation_times_numeric(r: np.ndarray) -> tuple[float, float]:
    """Times -1/lambda for the two decaying eigenvalues, fastest first.

    Vanishing eigenvalues give unbounded times, reported as ``math.inf``.
    """
    validate_rate_matrix(r)
    scale = max(np.abs(r).max(), 1.0)
    times = []
    for lam in decay_eigenvalues(r):
        times.append(math.inf if lam > -1e-14 * scale else -1.0 / lam)
    times.sort()
    return times[0], times[1]


def relaxation_times_analytic(
    zf: ZeroFieldOverlaps, theta: float, p: OrbachParams
) -> tuple[float, float]:
    """Closed-form (T1_a, T1_b) valid for tp_sq == tm_sq at mu = 1.

    T1_a belongs to the symmetric (1, -2, 1) population mode and T1_b to
    the antisymmetric (1, 0, -1) mode; the pair matches the numeric
    eigenvalues of ``singlet_rate_matrix`` when mu is forced to 1.
    """
    if not math.isclose(zf.tp_sq, zf.tm_sq, rel_tol=1e-12, abs_tol=1e-300):
        raise ValueError("closed form requires tp_sq == tm_sq")
    ov = mixed_overlaps(zf, theta)
    k = p.rate_coefficient_c * p.thermal_factor
    rate_a = 1.5 * k * ov.t0_sq * (ov.tp_sq + ov.tm_sq)
    rate_b = k * ov.tm_sq * (2.0 * ov.tp_sq + ov.t0_sq)
    t1_a = math.inf if rate_a == 0.0 else 1.0 / rate_a
    t1_b = math.inf if rate_b == 0.0 else 1.0 / rate_b
    return t1_a, t1_b


def relaxation_times_large_imbalance(
    zf: ZeroFieldOverlaps, theta: float, p: OrbachParams
) -> tuple[float, float]:
    """Large-imbalance limit: rates (3/8) C t0^4 sin^2(2 theta) and
    (1/2) C t0^4 sin^2(theta), times exp(+Ea/kT)-scaled."""
    k = p.rate_coefficient_c * p.thermal_factor * zf.t0_sq**2
    rate_a = 0.375 * k * math.sin(2.0 * theta) ** 2
    rate_b = 0.5 * k * math.sin(theta) ** 2
    t1_a = math.inf if rate_a == 0.0 else 1.0 / rate_a
    t1_b = math.inf if rate_b == 0.0 else 1.0 / rate_b
    return t1_a, t1_b


def labeled_relaxation_times(r: np.ndarray, mu: float) -> tuple[float, float]:
    """(T1_a, T1_b) from a generator, labelled by eigenmode symmetry.

    The generator is symmetrized with its detailed-balance weights; the
    decaying mode with the larger projection on the antisymmetric
    (1, 0, -1) direction is labelled b, the other a. At mu = 1 and
    tp = tm this reproduces the closed-form labels exactly.
    """
    validate_rate_matrix(r)
    w = stationary_weights(mu)
    sym = np.diag(w**-0.5) @ np.asarray(r, dtype=float) @ np.diag(w**0.5)
    sym = 0.5 * (sym + sym.T)
    eigvals, vecs = np.linalg.eigh(sym)
    order = np.argsort(np.abs(eigvals))
    decay_idx = order[1:]
    probe = np.array([1.0, 0.0, -1.0]) * w**-0.5
    probe /= np.linalg.norm(probe)
    overlaps = [abs(float(vecs[:, i] @ probe)) for i in decay_idx]
    b_idx = decay_idx[int(np.argmax(overlaps))]
    a_idx = decay_idx[0] if b_idx == decay_idx[1] else decay_idx[1]
    scale = max(np.abs(eigvals).max(), 1.0)

    def _time(lam: float) -> float:
        return math.inf if lam > -1e-14 * scale else -1.0 / lam

    return _time(eigvals[a_idx]), _time(eigvals[b_idx])


def t2_singlet(
    zf: ZeroFieldOverlaps,
    theta: float,
    p: OrbachParams,
    t2_id_s: float = math.inf,
    t2_sd_s: float = math.inf,
    transition: str = "0p",
) -> float:
    """Coherence time for one transition under the full-loss excursion model.

    1/T2 = (C/3)(sum of zero-field overlaps)(|t_m|^2 + |t_m'|^2) exp(-Ea/kT)
    plus the instantaneous-diffusion and spectral-diffusion backgrounds.
    Pass ``math.inf`` for an absent background channel.
    """
    ov = mixed_overlaps(zf, theta)
    i, j = TRANSITIONS[transition]
    t = ov.vector()
    zf_total = zf.t0_sq + zf.tp_sq + zf.tm_sq
    rate = (
        (p.rate_coefficient_c / 3.0) * zf_total * (t[i] + t[j]) * p.thermal_factor
    )
    rate += 1.0 / t2_id_s + 1.0 / t2_sd_s
    return math.inf if rate == 0.0 else 1.0 / rate


def t1_t2_ratio(
    zf: ZeroFieldOverlaps, theta: float, transition: str = "0p"
) -> float:
    """Predicted T1_a / T2 ratio for a transition, independent of C and T.

    Evaluates ((|t_pm|^2 + |t_0|^2)(|t0_0|^2 + 2 |t0_pm|^2)) /
    (3 |t_pm|^2 |t_0|^2) with the mixed overlaps at the given angle.
    """
    ov = mixed_overlaps(zf, theta)
    t = ov.vector()
    i, j = TRANSITIONS[transition]
    pm = t[i] if i != 1 else t[j]
    t0 = t[1]
    zf_pm = zf.tm_sq if transition == "m0" else zf.tp_sq
    numer = (pm + t0) * (zf.t0_sq + 2.0 * zf_pm)
    denom = 3.0 * pm * t0
    return math.inf if denom == 0.0 else numer / denom
