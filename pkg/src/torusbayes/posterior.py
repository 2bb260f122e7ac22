"""MAP/CM estimation and the posterior Gaussian.

For measurement m = A u + delta * noise with Gaussian prior N(0, C_U) the
posterior is Gaussian with mean

    U = (A^H A + delta^2 C_U^{-1})^{-1} A^H m

and covariance C = delta^2 (A^H A + delta^2 C_U^{-1})^{-1}.  When both A
and C_U are Fourier multipliers everything is a per-frequency scalar
formula; otherwise the normal equations are solved by preconditioned
conjugate gradients and the covariance is formed densely.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .fields import GaussianPrior, operator_sqrt, sample_white_noise
from .lattice import FrequencyLattice, SpectralField
from .operators import (
    DenseOp,
    MultiplierOp,
    Operator,
    apply,
    densify,
    symbol_values,
)
from .rates import SmoothnessParams, _basic_flags

__all__ = [
    "SolverError",
    "GaussianModel",
    "PosteriorGaussian",
    "map_estimate",
    "map_estimate_discrete",
    "posterior_covariance",
    "posterior_covariance_update",
    "posterior_trace",
    "posterior",
    "sample_posterior",
    "credible_ball_prob",
]

CG_TOL = 1e-10


class SolverError(RuntimeError):
    """Iterative solve failed; carries the relative residual history."""

    def __init__(self, message: str, residuals):
        super().__init__(message)
        self.residuals = list(residuals)


@dataclass(frozen=True)
class GaussianModel:
    """Forward operator, prior, and noise level of one inverse problem.

    Rate-prediction hypotheses (s > d/2, t > max(0, s - tau), t0 < 2t + r) are
    checked at construction; violations are warnings stored in
    ``hypothesis_messages``, never errors, so off-regime experiments run.
    """

    fwd: Operator
    prior: GaussianPrior
    s: float
    d: int
    delta: float
    hypothesis_messages: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        msgs = _basic_flags(self.params())
        object.__setattr__(self, "hypothesis_messages", tuple(msgs))
        for m in msgs:
            warnings.warn(m, stacklevel=3)

    def params(self, zeta: float | None = None) -> SmoothnessParams:
        return SmoothnessParams(
            r=self.prior.r, s=self.s, t=self.fwd.order_t,
            t0=self.fwd.order_t0, d=self.d, zeta=zeta,
        )

    def with_delta(self, delta: float) -> "GaussianModel":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return GaussianModel(self.fwd, self.prior, self.s, self.d, delta)


@dataclass(frozen=True)
class PosteriorGaussian:
    mean: SpectralField
    cov: Operator
    sqrt_cov: Operator
    model: GaussianModel


def _is_diagonal(model: GaussianModel) -> bool:
    return isinstance(model.fwd, MultiplierOp) and isinstance(model.prior.cov, MultiplierOp)


def _diag_weights(model: GaussianModel, lattice: FrequencyLattice):
    """Per-frequency |a|^2 and delta^2 / c_U of the normal operator."""
    a = symbol_values(model.fwd, lattice)
    c_u = symbol_values(model.prior.cov, lattice).real
    if np.any(c_u <= 0):
        raise ValueError("prior covariance symbol must be strictly positive")
    return np.abs(a) ** 2, model.delta**2 / c_u


def _pcg(mat: np.ndarray, b: np.ndarray, diag: np.ndarray, tol: float, maxiter: int):
    """Conjugate gradients with Jacobi preconditioner on a Hermitian PD system."""
    x = np.zeros_like(b)
    r = b.copy()
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return x, [0.0]
    inv_diag = 1.0 / diag
    z = inv_diag * r
    p = z.copy()
    rz = np.vdot(r, z).real
    residuals = [1.0]
    for _ in range(maxiter):
        if residuals[-1] <= tol:
            return x, residuals
        q = mat @ p
        alpha = rz / np.vdot(p, q).real
        x += alpha * p
        r -= alpha * q
        residuals.append(np.linalg.norm(r) / bnorm)
        z = inv_diag * r
        rz_new = np.vdot(r, z).real
        p = z + (rz_new / rz) * p
        rz = rz_new
    if residuals[-1] <= tol:
        return x, residuals
    raise SolverError(
        f"conjugate gradients not converged after {maxiter} iterations "
        f"(relative residual {residuals[-1]:.3e})",
        residuals,
    )


def _normal_system(model: GaussianModel, lattice: FrequencyLattice):
    """Dense N = A^H A + delta^2 C_U^{-1} plus its multiplier-part diagonal."""
    a_mat = densify(model.fwd, lattice).matrix
    normal = a_mat.conj().T @ a_mat
    if isinstance(model.prior.cov, MultiplierOp):
        prec = model.delta**2 / symbol_values(model.prior.cov, lattice).real
        normal = normal + np.diag(prec.astype(complex))
    else:
        c_mat = densify(model.prior.cov, lattice).matrix
        normal = normal + model.delta**2 * np.linalg.inv(c_mat)
    # Jacobi diagonal; the multiplier parts dominate it as delta -> 0
    diag = np.abs(np.diag(normal).real)
    diag = np.maximum(diag, 1e-300)
    return normal, diag


def map_estimate(model: GaussianModel, m: SpectralField) -> SpectralField:
    """Posterior mean (equals the MAP point for this Gaussian conjugate pair).

    Diagonal models use the per-frequency formula
    conj(a) m_hat / (|a|^2 + delta^2 / c_U); anything dense goes through
    preconditioned conjugate gradients on the normal equations with
    relative residual 1e-10 and an iteration cap of 10 K.
    """
    lattice = m.lattice
    if _is_diagonal(model):
        asq, prec = _diag_weights(model, lattice)
        a = symbol_values(model.fwd, lattice)
        return SpectralField(lattice, np.conj(a) * m.coeffs / (asq + prec))
    normal, diag = _normal_system(model, lattice)
    b = densify(model.fwd, lattice).matrix.conj().T @ m.coeffs
    x, _ = _pcg(normal, b, diag, CG_TOL, 10 * lattice.size)
    return SpectralField(lattice, x)


def map_estimate_discrete(a_mat, c_mat, delta: float, mvec) -> np.ndarray:
    """Direct dense solve of (A^H A + delta^2 C^{-1}) u = A^H m.

    Reference path for cross-checking the spectral estimator; ``a_mat`` may
    be rectangular (k measurements of an n-vector).
    """
    a_mat = np.asarray(a_mat, dtype=complex)
    c_mat = np.asarray(c_mat, dtype=complex)
    mvec = np.asarray(mvec, dtype=complex)
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if a_mat.shape[0] != mvec.shape[0] or a_mat.shape[1] != c_mat.shape[0]:
        raise ValueError(
            f"inconsistent shapes A{a_mat.shape}, C{c_mat.shape}, m{mvec.shape}"
        )
    try:
        c_inv = np.linalg.inv(c_mat)
        normal = a_mat.conj().T @ a_mat + delta**2 * c_inv
        return np.linalg.solve(normal, a_mat.conj().T @ mvec)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular system: {exc}") from exc


def posterior_covariance(model: GaussianModel, lattice: FrequencyLattice | None = None) -> Operator:
    """Posterior covariance delta^2 (A^H A + delta^2 C_U^{-1})^{-1}."""
    if _is_diagonal(model):
        fwd_sym, cov_sym, delta = model.fwd.symbol, model.prior.cov.symbol, model.delta

        def c_symbol(freqs: np.ndarray) -> np.ndarray:
            a = np.asarray(fwd_sym(freqs), dtype=complex)
            c_u = np.asarray(cov_sym(freqs), dtype=complex).real
            if np.any(c_u <= 0):
                raise ValueError("prior covariance symbol must be strictly positive")
            return (delta**2 / (np.abs(a) ** 2 + delta**2 / c_u)).astype(complex)

        return MultiplierOp(
            c_symbol, model.prior.cov.order_t, model.prior.cov.order_t0,
            label=f"postcov({model.fwd.label})",
        )
    lattice = _dense_lattice(model, lattice)
    normal, _ = _normal_system(model, lattice)
    c_mat = model.delta**2 * np.linalg.inv(normal)
    c_mat = 0.5 * (c_mat + c_mat.conj().T)
    return DenseOp(
        lattice, c_mat, model.prior.cov.order_t, model.prior.cov.order_t0,
        label=f"postcov({model.fwd.label})",
    )


def posterior_covariance_update(
    model: GaussianModel, lattice: FrequencyLattice | None = None
) -> DenseOp:
    """Same covariance in update form C_U - C_U A^H (A C_U A^H + delta^2 I)^{-1} A C_U.

    Always dense; unlike the precision form it never inverts C_U or A, so
    it also covers singular forward operators.
    """
    lattice = _dense_lattice(model, lattice)
    a_mat = densify(model.fwd, lattice).matrix
    c_mat = densify(model.prior.cov, lattice).matrix
    gram = a_mat @ c_mat @ a_mat.conj().T + model.delta**2 * np.eye(lattice.size)
    ac = a_mat @ c_mat
    c_post = c_mat - ac.conj().T @ np.linalg.solve(gram, ac)
    c_post = 0.5 * (c_post + c_post.conj().T)
    return DenseOp(
        lattice, c_post, model.prior.cov.order_t, model.prior.cov.order_t0,
        label=f"postcov_update({model.fwd.label})",
    )


def _dense_lattice(model: GaussianModel, lattice: FrequencyLattice | None) -> FrequencyLattice:
    for op in (model.fwd, model.prior.cov):
        if isinstance(op, DenseOp):
            if lattice is not None and op.lattice != lattice:
                raise ValueError("lattice does not match dense operator lattice")
            lattice = op.lattice
    if lattice is None:
        raise ValueError("lattice required when both operators are multipliers")
    return lattice


def posterior_trace(cov: Operator, q: float = 0.0, lattice: FrequencyLattice | None = None) -> float:
    """Weighted trace sum_l (1+|l|^2)^q c(l), the expected squared H^q norm of a draw."""
    if isinstance(cov, DenseOp):
        lattice = cov.lattice
        diag = np.diag(cov.matrix).real
    else:
        if lattice is None:
            raise ValueError("lattice required for a multiplier covariance")
        diag = symbol_values(cov, lattice).real
    return float(np.sum((1.0 + lattice.weights) ** q * diag))


def posterior(model: GaussianModel, m: SpectralField) -> PosteriorGaussian:
    """Assemble mean, covariance, and covariance root for one measurement."""
    mean = map_estimate(model, m)
    cov = posterior_covariance(model, m.lattice)
    return PosteriorGaussian(mean, cov, operator_sqrt(cov), model)


def sample_posterior(post: PosteriorGaussian, seed=None) -> SpectralField:
    """One draw mean + C^{1/2} xi with xi spectral white noise."""
    noise = sample_white_noise(post.mean.lattice, seed)
    return post.mean + apply(post.sqrt_cov, noise)


def credible_ball_prob(
    post: PosteriorGaussian,
    zeta1: float,
    radius: float,
    n_mc: int,
    seed=None,
) -> tuple[float, float]:
    """Monte-Carlo posterior probability of the H^zeta1 ball of given radius.

    Centred at the mean, so only the fluctuation W = C^{1/2} xi matters and
    the result is independent of the measurement.  Returns (probability,
    binomial standard error).
    """
    if n_mc < 100:
        raise ValueError(f"n_mc must be at least 100, got {n_mc}")
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    lattice = post.mean.lattice
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    weights = (1.0 + lattice.weights) ** zeta1
    k = lattice.size
    hits = 0
    batch = max(1, min(n_mc, (1 << 22) // k))
    if isinstance(post.sqrt_cov, MultiplierOp):
        root = symbol_values(post.sqrt_cov, lattice)
        dense_root = None
    else:
        root = None
        dense_root = post.sqrt_cov.matrix
    done = 0
    axes = tuple(range(1, lattice.dim + 1))
    while done < n_mc:
        b = min(batch, n_mc - done)
        z = rng.standard_normal((b, *lattice.shape))
        noise = np.fft.fftn(z, axes=axes).reshape(b, k) / np.sqrt(k)
        if root is not None:
            w = noise * root[None, :]
        else:
            w = noise @ dense_root.T
        norms_sq = np.sum(weights[None, :] * np.abs(w) ** 2, axis=1)
        hits += int(np.count_nonzero(norms_sq <= radius**2))
        done += b
    p = hits / n_mc
    stderr = float(np.sqrt(p * (1.0 - p) / n_mc))
    return p, stderr
