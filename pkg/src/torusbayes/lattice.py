"""Frequency lattices and spectral fields on flat tori.

The torus is ``T^d = (R / 2 pi Z)^d`` with ``d`` in {1, 2, 3}, discretised by a
uniform grid of ``n`` points per axis.  Fields are represented by their
coefficients against the complex exponentials ``exp(i l . x)``, orthonormal
with respect to the normalised Haar measure ``(2 pi)^{-d} dx``.  With this
convention the constant field 1 has a single coefficient 1 at ``l = 0`` and
Parseval's identity reads ``sum |coeff|^2 = mean(|values|^2)`` exactly on the
grid.

Coefficients of a real field satisfy the Hermitian symmetry
``coeff(-l) = conj(coeff(l))``; the inverse transform verifies this before
discarding the imaginary residue.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FrequencyLattice",
    "SpectralField",
    "build_lattice",
    "forward_transform",
    "inverse_transform",
]

# Tolerance for the Hermitian-symmetry check in inverse_transform, relative
# to max(1, max |coeff|).
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class FrequencyLattice:
    """Integer frequency lattice for a torus of dimension ``dim``.

    Frequencies are listed in FFT index order per axis
    (``0, 1, ..., n/2 - 1, -n/2, ..., -1``), flattened in C order, so the
    flat coefficient vector of a field reshapes directly to the numpy FFT
    layout.  Each frequency component lies in ``[-n/2, n/2)``.

    Attributes
    ----------
    dim : int
        Torus dimension, one of 1, 2, 3.
    n_per_dim : int
        Even number of grid points per axis, at least 4.
    freqs : (size, dim) int array
        Integer frequency vectors, derived, read-only.
    weights : (size,) float array
        Squared Euclidean norms ``|l|^2``, derived, read-only.
    """

    dim: int
    n_per_dim: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.n_per_dim < 4 or self.n_per_dim % 2 != 0:
            raise ValueError(
                f"n_per_dim must be even and >= 4, got {self.n_per_dim}"
            )
        n = self.n_per_dim
        axis = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
        grids = np.meshgrid(*([axis] * self.dim), indexing="ij")
        freqs = np.stack([g.ravel() for g in grids], axis=-1)
        freqs.setflags(write=False)
        weights = np.sum(freqs.astype(np.float64) ** 2, axis=1)
        weights.setflags(write=False)
        # index of -l for every l, used by the Hermitian-symmetry check
        axes_idx = np.unravel_index(np.arange(freqs.shape[0]), self.shape)
        conj_index = np.ravel_multi_index(
            tuple((-ix) % n for ix in axes_idx), self.shape
        )
        conj_index.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "conj_index", conj_index)

    @property
    def size(self) -> int:
        return self.n_per_dim**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_per_dim,) * self.dim

    def grid_axes(self) -> tuple[np.ndarray, ...]:
        """Physical grid coordinates, ``x_j = 2 pi j / n`` per axis."""
        x = 2.0 * np.pi * np.arange(self.n_per_dim) / self.n_per_dim
        return (x,) * self.dim


@dataclass(frozen=True, eq=False)
class SpectralField:
    """A field on the torus stored as a flat complex coefficient vector."""

    lattice: FrequencyLattice
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (self.lattice.size,):
            raise ValueError(
                f"coeffs must have shape ({self.lattice.size},), got {c.shape}"
            )
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        if self.lattice != other.lattice:
            raise ValueError("lattice mismatch")
        return SpectralField(self.lattice, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        if self.lattice != other.lattice:
            raise ValueError("lattice mismatch")
        return SpectralField(self.lattice, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "SpectralField":
        return SpectralField(self.lattice, self.coeffs * scalar)

    __rmul__ = __mul__


def build_lattice(dim: int, n_per_dim: int) -> FrequencyLattice:
    """Construct the frequency lattice for ``T^dim`` with ``n_per_dim`` points per axis."""
    return FrequencyLattice(dim, n_per_dim)


def forward_transform(lattice: FrequencyLattice, values) -> SpectralField:
    """Transform real grid samples to spectral coefficients.

    ``values`` must be a real array with ``lattice.size`` samples, either flat
    or shaped ``lattice.shape``.  The round trip with
    :func:`inverse_transform` is exact to machine precision.
    """
    if np.iscomplexobj(values):
        raise TypeError("grid samples must be real")
    v = np.asarray(values, dtype=np.float64)
    if v.size != lattice.size:
        raise ValueError(
            f"expected {lattice.size} samples, got {v.size}"
        )
    v = v.reshape(lattice.shape)
    coeffs = np.fft.fftn(v) / lattice.size
    return SpectralField(lattice, coeffs.ravel())


def hermitian_defect(field: SpectralField) -> float:
    """Max absolute deviation from coeff(-l) = conj(coeff(l))."""
    c = field.coeffs
    return float(np.max(np.abs(c - np.conj(c[field.lattice.conj_index]))))


def inverse_transform(field: SpectralField) -> np.ndarray:
    """Transform spectral coefficients back to real grid samples.

    Requires Hermitian symmetry of the coefficients; the residual imaginary
    part is verified against ``HERMITIAN_TOL`` and then discarded.
    """
    lat = field.lattice
    scale = max(1.0, float(np.max(np.abs(field.coeffs))))
    defect = hermitian_defect(field)
    if defect > HERMITIAN_TOL * scale:
        raise ValueError(
            f"coefficients are not Hermitian-symmetric: defect {defect:.3e} "
            f"exceeds {HERMITIAN_TOL:.1e} * {scale:.3e}"
        )
    w = np.fft.ifftn(field.coeffs.reshape(lat.shape)) * lat.size
    return np.real(w)
