"""Orbach relaxation through a triplet excited state.

Ground and excited S=1 manifolds share the g tensor and field but carry
different zero-field tensors. Spin flips proceed through any excited
sublevel with probability set by eigenbasis overlap, so the rate matrix
is built from |<m|n>|^2 tables instead of scalar amplitudes. Ground
eigenstates are labelled m = -1, 0, +1 in ascending energy order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import orbach_singlet as singlet
from .constants import CONSTANTS
from .spin_core import (
    FieldConfig,
    GTensor,
    SpinSystemParams,
    ZfsTensor,
    build_hamiltonian,
    eigensolve,
)

#: Eigenvalue gap (GHz) below which the overlap table is basis-sensitive.
DEGENERACY_GAP_GHZ = 1e-6

#: Random rotations averaged over inside a degenerate subspace.
DEGENERATE_SUBSPACE_SAMPLES = 64


@dataclass(frozen=True)
class TripletModelParams:
    """Ground and excited zero-field tensors plus shared field/thermal data."""

    ground_zfs: ZfsTensor
    excited_zfs: ZfsTensor
    g: GTensor
    field: FieldConfig
    orbach: singlet.OrbachParams

    def ground_params(self) -> SpinSystemParams:
        return SpinSystemParams(self.ground_zfs, self.g, self.field)

    def excited_params(self) -> SpinSystemParams:
        return SpinSystemParams(self.excited_zfs, self.g, self.field)


@dataclass(frozen=True)
class TripletOverlapTable:
    """Squared overlaps O[m, n] = |<m|n>|^2 between the two eigenbases.

    ``raw`` holds the complex amplitudes <m|n> from which ``table`` was
    formed; with orthonormal bases the table is doubly stochastic.
    ``basis_sensitive`` marks tables formed inside degenerate subspaces,
    where the overlaps were averaged over random in-subspace rotations.
    """

    table: np.ndarray
    raw: np.ndarray
    ground_energies_ghz: np.ndarray
    excited_energies_ghz: np.ndarray
    basis_sensitive: bool = False


def _degenerate_clusters(energies: np.ndarray) -> list[list[int]]:
    """Group level indices whose gaps fall below the degeneracy threshold."""
    clusters: list[list[int]] = [[0]]
    for i in range(1, len(energies)):
        if energies[i] - energies[i - 1] < DEGENERACY_GAP_GHZ:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def _random_subspace_rotations(
    states: np.ndarray, clusters: list[list[int]], rng: np.random.Generator
) -> np.ndarray:
    """Apply Haar-random unitaries within each degenerate cluster."""
    rotated = states.copy()
    for cluster in clusters:
        if len(cluster) < 2:
            continue
        d = len(cluster)
        z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
        q, r = np.linalg.qr(z)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        rotated[:, cluster] = rotated[:, cluster] @ q
    return rotated


def triplet_overlap_table(p: TripletModelParams) -> TripletOverlapTable:
    """Overlap table between ground and excited eigenbases.

    Degenerate subspaces make |<m|n>|^2 basis-dependent; such tables are
    flagged and replaced by an average over random rotations within the
    degenerate cluster (deterministic seed).
    """
    gsys = eigensolve(build_hamiltonian(p.ground_params()))
    esys = eigensolve(build_hamiltonian(p.excited_params()))
    raw = gsys.states.conj().T @ esys.states

    gclusters = _degenerate_clusters(gsys.energies)
    eclusters = _degenerate_clusters(esys.energies)
    sensitive = any(len(c) > 1 for c in gclusters + eclusters)
    if not sensitive:
        table = np.abs(raw) ** 2
    else:
        rng = np.random.default_rng(0)
        acc = np.zeros((3, 3))
        for _ in range(DEGENERATE_SUBSPACE_SAMPLES):
            gstates = _random_subspace_rotations(gsys.states, gclusters, rng)
            estates = _random_subspace_rotations(esys.states, eclusters, rng)
            acc += np.abs(gstates.conj().T @ estates) ** 2
        table = acc / DEGENERATE_SUBSPACE_SAMPLES
    return TripletOverlapTable(
        table=table,
        raw=raw,
        ground_energies_ghz=gsys.energies,
        excited_energies_ghz=esys.energies,
        basis_sensitive=sensitive,
    )


def flip_strengths(table: np.ndarray) -> np.ndarray:
    """Pair strengths S[m, m'] = sum_n O[m, n] O[m', n] (symmetric)."""
    return table @ table.T


def triplet_rate_matrix(
    p: TripletModelParams, overlaps: TripletOverlapTable | None = None
) -> np.ndarray:
    """3x3 generator with flips summed over the excited sublevels.

    Off-diagonal (m, m') is C mu^(m-m') sum_n |<m|n><n|m'>|^2 exp(-Ea/kT);
    diagonals enforce zero column sums as in the singlet model.
    """
    if overlaps is None:
        overlaps = triplet_overlap_table(p)
    strengths = flip_strengths(overlaps.table)
    return singlet._rate_matrix_from_products(
        strengths,
        p.orbach.boltzmann_mu,
        p.orbach.rate_coefficient_c * p.orbach.thermal_factor,
    )


def triplet_relaxation_times(p: TripletModelParams) -> tuple[float, float]:
    """Numeric (fast, slow) relaxation times of the triplet rate matrix."""
    return singlet.relaxation_times_numeric(triplet_rate_matrix(p))


def triplet_labeled_times(p: TripletModelParams) -> tuple[float, float]:
    """(T1_a, T1_b) labelled by eigenmode symmetry, for orientation sweeps."""
    return singlet.labeled_relaxation_times(
        triplet_rate_matrix(p), p.orbach.boltzmann_mu
    )


def _coherent_return_fraction(
    overlaps: TripletOverlapTable,
    i: int,
    j: int,
    mode: str,
    tau_e_s: float | None,
    freq_match_tol_ghz: float = 1e-9,
) -> float:
    """Fraction of the (i, j) ground coherence surviving one excursion.

    Each excursion maps the coherence onto excited-pair coherences with
    weight O[i, n] O[j, n']; a pair survives according to how well its
    precession frequency matches the ground transition. ``full-dephasing``
    keeps only exact matches; ``partial-coherence`` weights each pair by
    the magnitude of the phase factor averaged over an exponential
    excursion duration tau_e.
    """
    ground_freq = overlaps.ground_energies_ghz[j] - overlaps.ground_energies_ghz[i]
    e = overlaps.excited_energies_ghz
    delta_ghz = (e[None, :] - e[:, None]) - ground_freq  # indexed [n, n']
    if mode == "full-dephasing":
        survival = (np.abs(delta_ghz) <= freq_match_tol_ghz).astype(float)
    elif mode == "partial-coherence":
        if tau_e_s is None or tau_e_s < 0:
            raise ValueError("partial-coherence mode requires tau_e_s >= 0")
        omega = 2.0 * math.pi * delta_ghz * 1e9
        survival = 1.0 / np.sqrt(1.0 + (omega * tau_e_s) ** 2)
    else:
        raise ValueError(f"unknown dephasing model {mode!r}")
    weights = np.outer(overlaps.table[i], overlaps.table[j])  # [n, n']
    return float(np.sum(weights * survival))


def triplet_t2_model(
    p: TripletModelParams,
    transition: str = "0p",
    model: str = "full-dephasing",
    tau_e_s: float | None = None,
    t2_id_s: float = math.inf,
    t2_sd_s: float = math.inf,
) -> float:
    """Coherence time under an excursion-dephasing model (a model choice).

    The dephasing rate is C exp(-Ea/kT) (1 - f) where f is the coherent
    return fraction of the measured transition; identical ground and
    excited Hamiltonians give f = 1 and no dephasing, and tau_e -> 0 in
    partial-coherence mode likewise preserves coherence. Background
    channels contribute additively as inverse times.
    """
    overlaps = triplet_overlap_table(p)
    i, j = singlet.TRANSITIONS[transition]
    f = _coherent_return_fraction(overlaps, i, j, model, tau_e_s)
    f = min(f, 1.0)
    rate = p.orbach.rate_coefficient_c * p.orbach.thermal_factor * (1.0 - f)
    rate += 1.0 / t2_id_s + 1.0 / t2_sd_s
    return math.inf if rate == 0.0 else 1.0 / rate


def coaxial_triplet_params(
    d_e_ghz: float,
    theta: float,
    orbach: singlet.OrbachParams,
    d_g_ghz: float = 0.94,
    field_mt: float = 345.8,
    g: GTensor | None = None,
) -> TripletModelParams:
    """Convenience constructor for a coaxial, purely axial excited tensor."""
    return TripletModelParams(
        ground_zfs=ZfsTensor(axial_d=d_g_ghz),
        excited_zfs=ZfsTensor(axial_d=d_e_ghz),
        g=g or GTensor(),
        field=FieldConfig(field_mt, theta),
        orbach=orbach,
    )


def calibrate_rate_coefficient(
    d_e_ghz: float,
    thetas: np.ndarray,
    reference_times: np.ndarray,
    orbach_template: singlet.OrbachParams,
    **kwargs,
) -> float:
    """Least-squares C (in log space) matching triplet T1 curves to a reference.

    ``reference_times`` has shape (len(thetas), 2) with (T1_a, T1_b)
    columns. Because every model time scales as 1/C, the optimum is a
    closed-form geometric mean; nonfinite entries are ignored.
    """
    base = singlet.OrbachParams(
        rate_coefficient_c=1.0,
        activation_energy_mev=orbach_template.activation_energy_mev,
        temperature_k=orbach_template.temperature_k,
        zeeman_freq_ghz=orbach_template.zeeman_freq_ghz,
    )
    logs = []
    for theta, ref in zip(thetas, np.asarray(reference_times, dtype=float)):
        params = coaxial_triplet_params(d_e_ghz, float(theta), base, **kwargs)
        model = triplet_labeled_times(params)
        for t_model, t_ref in zip(model, ref):
            if math.isfinite(t_model) and math.isfinite(t_ref) and t_ref > 0:
                logs.append(math.log(t_model) - math.log(t_ref))
    if not logs:
        raise ValueError("no finite reference times to calibrate against")
    return float(math.exp(np.mean(logs)))
