"""S=1 spin Hamiltonians, eigensystems, and ESR resonance fields.

The working basis throughout is |m_s = -1, 0, +1> (index 0, 1, 2). All
Hamiltonians are expressed in GHz in the defect frame: the zero-field
tensor axis defaults to the frame z axis and the static field is tilted
by ``theta`` in the xz plane. The four <111> defect orientations are
handled by computing each site's tilt angle from crystallography.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .constants import CONSTANTS

_SQ2 = 1.0 / math.sqrt(2.0)

#: Spin-1 operators in the ascending |m_s = -1, 0, +1> basis.
SPIN_Z = np.diag([-1.0, 0.0, 1.0]).astype(complex)
SPIN_X = np.array(
    [[0.0, _SQ2, 0.0], [_SQ2, 0.0, _SQ2], [0.0, _SQ2, 0.0]], dtype=complex
)
SPIN_Y = np.array(
    [[0.0, 1j * _SQ2, 0.0], [-1j * _SQ2, 0.0, 1j * _SQ2], [0.0, -1j * _SQ2, 0.0]],
    dtype=complex,
)

#: Representative <111> axes: the aligned site and the three off-axis sites.
SITES_111 = {
    "[111]": np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0),
    "[-1-11]": np.array([-1.0, -1.0, 1.0]) / math.sqrt(3.0),
    "[1-1-1]": np.array([1.0, -1.0, -1.0]) / math.sqrt(3.0),
    "[-11-1]": np.array([-1.0, 1.0, -1.0]) / math.sqrt(3.0),
}

#: Eigenvalue gap below which a spectrum is reported as degenerate (GHz).
DEGENERACY_TOL_GHZ = 1e-9


@dataclass(frozen=True)
class ZfsTensor:
    """Traceless zero-field splitting tensor (GHz) with optional axis tilt.

    ``axial_d`` and ``rhombic_e`` follow the D(Sz^2 - S(S+1)/3) + E(Sx^2 - Sy^2)
    operator convention in the tensor's principal frame; ``axis_polar`` and
    ``axis_azimuth`` orient the principal z axis within the defect frame.
    """

    axial_d: float
    rhombic_e: float = 0.0
    axis_polar: float = 0.0
    axis_azimuth: float = 0.0

    def principal_values(self) -> np.ndarray:
        """Principal (x, y, z) values of the traceless tensor in GHz."""
        d, e = self.axial_d, self.rhombic_e
        return np.array([-d / 3.0 + e, -d / 3.0 - e, 2.0 * d / 3.0])

    def tensor(self) -> np.ndarray:
        """3x3 spatial tensor in the defect frame."""
        rot = _rotation_from_angles(self.axis_polar, self.axis_azimuth)
        return rot @ np.diag(self.principal_values()) @ rot.T


@dataclass(frozen=True)
class GTensor:
    """Axial electron g tensor."""

    g_parallel: float = 2.0042
    g_perpendicular: float = 2.0035

    def __post_init__(self) -> None:
        for g in (self.g_parallel, self.g_perpendicular):
            if not 1.9 <= g <= 2.1:
                raise ValueError(f"g value {g} outside the expected [1.9, 2.1] range")


@dataclass(frozen=True)
class FieldConfig:
    """Static field magnitude (mT) and tilt angle from the defect axis."""

    magnitude_mt: float
    theta: float
    site_label: str = "[111]"

    def __post_init__(self) -> None:
        if self.magnitude_mt < 0:
            raise ValueError("field magnitude must be nonnegative")
        if not 0.0 <= self.theta <= math.pi + 1e-12:
            raise ValueError("theta must lie in [0, pi]")


@dataclass(frozen=True)
class SpinSystemParams:
    """Complete parameter set for one S=1 spin Hamiltonian."""

    zfs: ZfsTensor
    g: GTensor
    field: FieldConfig


@dataclass(frozen=True)
class EigenSystem3:
    """Energies (GHz, ascending) and orthonormal eigenstates of a 3x3 system.

    ``states[:, i]`` is the eigenvector for ``energies[i]`` in the
    |m_s = -1, 0, +1> basis. ``degenerate`` marks eigenvalue gaps below
    ``DEGENERACY_TOL_GHZ`` so downstream overlap computations can warn.
    """

    energies: np.ndarray
    states: np.ndarray
    degenerate: bool = field(default=False)


def _rotation_from_angles(polar: float, azimuth: float) -> np.ndarray:
    """Rotation mapping the z axis onto the (polar, azimuth) direction."""
    cp, sp = math.cos(polar), math.sin(polar)
    ca, sa = math.cos(azimuth), math.sin(azimuth)
    ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    rz = np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])
    return rz @ ry


def effective_g(g: GTensor, theta: float) -> float:
    """Effective g value sqrt(g_par^2 cos^2 + g_perp^2 sin^2) at tilt theta."""
    if not 0.0 <= theta <= math.pi + 1e-12:
        raise ValueError("theta must lie in [0, pi]")
    c, s = math.cos(theta), math.sin(theta)
    return math.sqrt((g.g_parallel * c) ** 2 + (g.g_perpendicular * s) ** 2)


def zeeman_operator(g: GTensor, theta: float) -> np.ndarray:
    """Zeeman Hamiltonian per mT of applied field (GHz/mT), field in xz plane."""
    bx, bz = math.sin(theta), math.cos(theta)
    scale = CONSTANTS.bohr_magneton_ghz_per_mt
    return scale * (g.g_perpendicular * bx * SPIN_X + g.g_parallel * bz * SPIN_Z)


def zero_field_hamiltonian(zfs: ZfsTensor) -> np.ndarray:
    """Zero-field part S.D.S of the Hamiltonian (GHz), traceless."""
    dten = zfs.tensor()
    ops = (SPIN_X, SPIN_Y, SPIN_Z)
    h = np.zeros((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            if dten[i, j] != 0.0:
                h += dten[i, j] * (ops[i] @ ops[j])
    return h


def build_hamiltonian(params: SpinSystemParams) -> np.ndarray:
    """Assemble the S=1 Hamiltonian S.D.S + (mu_B/h) S.g.B in GHz.

    The returned matrix is Hermitian to better than 1e-12 and its
    zero-field part is traceless by construction.
    """
    h = zero_field_hamiltonian(params.zfs)
    h += params.field.magnitude_mt * zeeman_operator(params.g, params.field.theta)
    return 0.5 * (h + h.conj().T)


def eigensolve(h: np.ndarray, hermiticity_tol: float = 1e-10) -> EigenSystem3:
    """Diagonalize a 3x3 Hermitian matrix into an ``EigenSystem3``.

    Raises ``ValueError`` if the input deviates from Hermiticity by more
    than ``hermiticity_tol`` relative to its norm.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (3, 3):
        raise ValueError("expected a 3x3 matrix")
    scale = max(np.linalg.norm(h), 1.0)
    if np.linalg.norm(h - h.conj().T) > hermiticity_tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    energies, states = np.linalg.eigh(h)
    gaps = np.diff(energies)
    return EigenSystem3(
        energies=energies,
        states=states,
        degenerate=bool(np.any(gaps < DEGENERACY_TOL_GHZ)),
    )


def transition_moment(states: np.ndarray, i: int, j: int, theta: float) -> float:
    """|<i|S_perp|j>|^2 for the microwave drive axis perpendicular to B."""
    s_perp = math.cos(theta) * SPIN_X - math.sin(theta) * SPIN_Z
    amp = states[:, i].conj() @ s_perp @ states[:, j]
    return float(abs(amp) ** 2)


@dataclass(frozen=True)
class ResonanceLine:
    """A single resonance: level pair, field position and transition moment."""

    levels: tuple[int, int]
    field_mt: float
    moment: float


def _transition_freqs(
    zfs: ZfsTensor, g: GTensor, theta: float, fields_mt: np.ndarray
) -> np.ndarray:
    """Transition frequencies f_ij(B) for all level pairs, shape (n, 3)."""
    h0 = zero_field_hamiltonian(zfs)
    h1 = zeeman_operator(g, theta)
    hs = h0[None, :, :] + fields_mt[:, None, None] * h1[None, :, :]
    energies = np.linalg.eigvalsh(hs)
    return np.stack(
        [
            energies[:, 1] - energies[:, 0],
            energies[:, 2] - energies[:, 1],
            energies[:, 2] - energies[:, 0],
        ],
        axis=1,
    )


_PAIRS = ((0, 1), (1, 2), (0, 2))


def resonance_fields(
    zfs: ZfsTensor,
    g: GTensor,
    theta: float,
    microwave_freq_ghz: float,
    window_mt: tuple[float, float] = (1.0, 1000.0),
    grid_points: int = 801,
    freq_tol_ghz: float = 1e-4,
) -> list[ResonanceLine]:
    """Locate all fields in the window where a level pair matches the drive.

    Each branch f_ij(B) is sampled on a grid and every bracketed crossing
    of the microwave frequency is refined by bisection; all roots on
    non-monotone branches are returned. An empty list means no resonance
    in the window.
    """
    if microwave_freq_ghz <= 0:
        raise ValueError("microwave frequency must be positive")
    lo, hi = window_mt
    if not 0 <= lo < hi:
        raise ValueError("invalid field window")
    grid = np.linspace(lo, hi, grid_points)
    freqs = _transition_freqs(zfs, g, theta, grid)

    lines: list[ResonanceLine] = []
    for k, (i, j) in enumerate(_PAIRS):
        resid = freqs[:, k] - microwave_freq_ghz

        def _f(b: float, _k: int = k) -> float:
            return float(
                _transition_freqs(zfs, g, theta, np.array([b]))[0, _k]
                - microwave_freq_ghz
            )

        for idx in np.nonzero(np.diff(np.signbit(resid)))[0]:
            b_root = brentq(_f, grid[idx], grid[idx + 1], xtol=1e-9)
            if abs(_f(b_root)) > freq_tol_ghz:
                continue
            params = SpinSystemParams(zfs, g, FieldConfig(b_root, theta))
            sys = eigensolve(build_hamiltonian(params))
            lines.append(
                ResonanceLine(
                    levels=(i, j),
                    field_mt=float(b_root),
                    moment=transition_moment(sys.states, i, j, theta),
                )
            )
    lines.sort(key=lambda line: line.field_mt)
    return lines


def rotate_about(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about a (non-normalized) axis."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    kmat = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + math.sin(angle) * kmat + (1 - math.cos(angle)) * (kmat @ kmat)


def site_angles(
    misalignment: float, rotation_axis: Sequence[float] = (1.0, -1.0, 0.0)
) -> dict[str, float]:
    """Tilt angle of each <111> site for a field rotated away from [111].

    The nominal field direction [111] is rotated by ``misalignment``
    (radians) about ``rotation_axis`` (a <110> axis by default); each
    site's theta is the angle between the rotated field and the site axis.
    """
    b_hat = rotate_about(np.asarray(rotation_axis), misalignment) @ SITES_111["[111]"]
    b_hat = b_hat / np.linalg.norm(b_hat)
    return {
        label: float(math.acos(np.clip(np.dot(b_hat, axis), -1.0, 1.0)))
        for label, axis in SITES_111.items()
    }


@dataclass(frozen=True)
class SpectrumLine:
    """One stick of a multi-site ESR spectrum."""

    site: str
    theta: float
    levels: tuple[int, int]
    field_mt: float
    moment: float
    weight: float = 1.0


def esr_spectrum_111(
    zfs: ZfsTensor,
    g: GTensor,
    microwave_freq_ghz: float,
    misalignment: float = 0.0,
    rotation_axis: Sequence[float] = (1.0, -1.0, 0.0),
    window_mt: tuple[float, float] = (1.0, 1000.0),
) -> list[SpectrumLine]:
    """Stick spectrum over the four <111> sites at a given misalignment.

    Sites are weighted equally (one stick per site and transition), so the
    1:3 aligned/off-axis degeneracy appears as coincident off-axis sticks
    at zero misalignment. Optical-polarization intensity differences are
    intentionally not modelled.
    """
    sticks: list[SpectrumLine] = []
    for label, theta in site_angles(misalignment, rotation_axis).items():
        for line in resonance_fields(zfs, g, theta, microwave_freq_ghz, window_mt):
            sticks.append(
                SpectrumLine(
                    site=label,
                    theta=theta,
                    levels=line.levels,
                    field_mt=line.field_mt,
                    moment=line.moment,
                )
            )
    sticks.sort(key=lambda s: (s.field_mt, s.site))
    return sticks
