"""Geometry, steering vectors, and response matrices for a morphable planar array.

The array is a uniform planar array in the xz plane whose elements can be
displaced along the surface normal (y axis). Element n sits at
``(i_x * dx, displacement_n, i_z * dz)`` with the flat index convention

    n = i_z * n_x + i_x        (0-based, row-major over z then x)

which matches the Kronecker ordering ``kron(a_z, a_x)`` used to assemble the
planar phase factors. All lengths are expressed in carrier wavelengths so
phases reduce to 2*pi times geometric path differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ArrayGeometry:
    """Static layout of the transmitting array.

    Parameters
    ----------
    n_x, n_z : int
        Number of elements along the x and z axes; total is ``n_x * n_z``.
    dx, dz : float
        Inter-element spacing along x and z, in wavelengths.
    wavelength : float
        Carrier wavelength in meters. Only needed to convert physical
        (meter) displacements at the I/O boundary.
    d_max : float
        Elastic morphing limit per element, in wavelengths (>= 0).
    """

    n_x: int
    n_z: int
    dx: float
    dz: float
    wavelength: float
    d_max: float = 0.0

    def __post_init__(self) -> None:
        if self.n_x < 1 or self.n_z < 1:
            raise ValueError(f"element counts must be >= 1, got {self.n_x}x{self.n_z}")
        if self.dx <= 0.0 or self.dz <= 0.0:
            raise ValueError(f"spacings must be positive, got dx={self.dx}, dz={self.dz}")
        if self.wavelength <= 0.0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if self.d_max < 0.0:
            raise ValueError(f"morphing limit must be >= 0, got {self.d_max}")

    @property
    def n_elements(self) -> int:
        return self.n_x * self.n_z

    @property
    def wavenumber(self) -> float:
        "Wavenumber 2*pi/wavelength in rad/m, derived (never stored)."
        return TWO_PI / self.wavelength


@dataclass
class SurfaceShape:
    """Per-element out-of-plane displacement, in wavelengths."""

    displacements: np.ndarray

    def __post_init__(self) -> None:
        self.displacements = np.asarray(self.displacements, dtype=float).ravel()

    @classmethod
    def zero(cls, geom: ArrayGeometry) -> "SurfaceShape":
        return cls(np.zeros(geom.n_elements))

    @classmethod
    def uniform_random(cls, geom: ArrayGeometry, rng: np.random.Generator) -> "SurfaceShape":
        "Draw each displacement uniformly from [-d_max, d_max]."
        return cls(rng.uniform(-geom.d_max, geom.d_max, size=geom.n_elements))

    @classmethod
    def from_meters(cls, displacements_m, wavelength: float) -> "SurfaceShape":
        return cls(np.asarray(displacements_m, dtype=float) / wavelength)

    def validate(self, geom: ArrayGeometry, box_tol: float = 1e-12) -> None:
        "Raise ValueError on length mismatch or morphing-range violation."
        if self.displacements.shape != (geom.n_elements,):
            raise ValueError(
                f"shape has {self.displacements.size} displacements, "
                f"geometry has {geom.n_elements} elements"
            )
        worst = float(np.max(np.abs(self.displacements), initial=0.0))
        if worst > geom.d_max + box_tol:
            raise ValueError(
                f"displacement {worst:g} exceeds morphing limit {geom.d_max:g}"
            )

    def copy(self) -> "SurfaceShape":
        return SurfaceShape(self.displacements.copy())


@dataclass
class TargetSet:
    """Directions (elevation theta, azimuth phi, radians) and RCS coefficients."""

    thetas: np.ndarray
    phis: np.ndarray
    rcs: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.thetas = np.atleast_1d(np.asarray(self.thetas, dtype=float))
        self.phis = np.atleast_1d(np.asarray(self.phis, dtype=float))
        if self.rcs is None:
            self.rcs = np.ones(self.thetas.size, dtype=complex)
        self.rcs = np.atleast_1d(np.asarray(self.rcs, dtype=complex))
        if not (self.thetas.size == self.phis.size == self.rcs.size):
            raise ValueError("thetas, phis, and rcs must have equal length")
        if self.thetas.size < 1:
            raise ValueError("at least one target is required")
        if np.any(self.thetas < 0.0) or np.any(self.thetas > np.pi):
            raise ValueError("elevation angles must lie in [0, pi]")
        if np.any(self.phis < 0.0) or np.any(self.phis > np.pi):
            raise ValueError("azimuth angles must lie in [0, pi]")

    @classmethod
    def from_degrees(cls, thetas_deg, phis_deg, rcs=None) -> "TargetSet":
        return cls(np.deg2rad(thetas_deg), np.deg2rad(phis_deg), rcs)

    @property
    def n_targets(self) -> int:
        return self.thetas.size


@dataclass
class ResponseMatrix:
    """Stacked steering vectors A (N x K) and their correlation B = A A^H."""

    a: np.ndarray
    b: np.ndarray

    @property
    def n_elements(self) -> int:
        return self.a.shape[0]

    @property
    def n_targets(self) -> int:
        return self.a.shape[1]


def steering_matrix(
    geom: ArrayGeometry,
    thetas: np.ndarray,
    phis: np.ndarray,
    displacements: np.ndarray,
) -> np.ndarray:
    """Steering vectors for several directions at once, as columns.

    Phase model per element and direction (theta, phi):
    x and z contributions from the rigid grid, plus the displacement term
    ``exp(-j 2 pi d_n sin(theta) sin(phi))``.

    Returns an (n_elements, n_directions) complex matrix whose entries all
    have unit modulus.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    displacements = np.asarray(displacements, dtype=float).ravel()
    if displacements.size != geom.n_elements:
        raise ValueError(
            f"shape has {displacements.size} displacements, "
            f"geometry has {geom.n_elements} elements"
        )

    sin_t = np.sin(thetas)
    v_x = geom.dx * sin_t * np.cos(phis)          # wavelengths
    v_z = geom.dz * np.cos(thetas)
    a_x = np.exp(-1j * TWO_PI * np.outer(np.arange(geom.n_x), v_x))   # (n_x, M)
    a_z = np.exp(-1j * TWO_PI * np.outer(np.arange(geom.n_z), v_z))   # (n_z, M)
    # kron(a_z, a_x) for every direction: flat index i_z * n_x + i_x
    planar = (a_z[:, None, :] * a_x[None, :, :]).reshape(geom.n_elements, -1)
    a_y = np.exp(-1j * TWO_PI * np.outer(displacements, sin_t * np.sin(phis)))
    return planar * a_y


def steering_vector(
    geom: ArrayGeometry, theta: float, phi: float, shape: SurfaceShape
) -> np.ndarray:
    """Steering vector toward direction (theta, phi), length ``n_elements``.

    Angles are radians, theta (elevation) and phi (azimuth) in [0, pi].
    """
    if not (0.0 <= theta <= np.pi and 0.0 <= phi <= np.pi):
        raise ValueError(f"angles out of range: theta={theta}, phi={phi}")
    return steering_matrix(geom, theta, phi, shape.displacements)[:, 0]


def response_matrix(
    geom: ArrayGeometry, targets: TargetSet, shape: SurfaceShape
) -> ResponseMatrix:
    """Build A (columns = steering vectors per target) and B = A A^H."""
    a = steering_matrix(geom, targets.thetas, targets.phis, shape.displacements)
    b = a @ a.conj().T
    b = 0.5 * (b + b.conj().T)  # kill BLAS round-off asymmetry
    return ResponseMatrix(a=a, b=b)
