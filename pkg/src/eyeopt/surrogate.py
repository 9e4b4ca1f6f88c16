"""Exact Gaussian-process regression and acquisition functions.

The GP uses a squared-exponential kernel on inputs already scaled to the unit
hypercube. Targets are z-scored before fitting unless ``standardize=False``.
Everything follows the maximization convention.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.special import ndtr

__all__ = [
    "KernelSpec",
    "AcquisitionSpec",
    "GpModel",
    "GpFitError",
    "kernel_eval",
    "kernel_matrix",
    "gp_fit",
    "gp_predict",
    "log_marginal_likelihood",
    "expected_improvement",
    "ucb",
    "acquisition",
    "JITTER_LADDER",
]

JITTER_LADDER = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)
DEFAULT_LENGTHSCALE_GRID = (0.05, 0.1, 0.2, 0.4, 0.8)


class GpFitError(RuntimeError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    """Squared-exponential kernel.

    ``lengthscale`` is a scalar or one value per input dimension. When
    ``lengthscale_grid`` is set, :func:`gp_fit` picks the scalar lengthscale
    from the grid with the highest log marginal likelihood.
    """

    lengthscale: float | tuple[float, ...] = 0.2
    signal_variance: float = 1.0
    noise_variance: float = 1e-6
    lengthscale_grid: tuple[float, ...] | None = None
    kind: str = "squared-exponential"

    def __post_init__(self):
        if self.kind != "squared-exponential":
            raise ValueError(f"unsupported kernel kind {self.kind!r}")
        ls = np.atleast_1d(np.asarray(self.lengthscale, dtype=np.float64))
        if ls.size == 0 or np.any(ls <= 0):
            raise ValueError("lengthscale must be > 0")
        if self.signal_variance <= 0:
            raise ValueError("signal_variance must be > 0")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be >= 0")
        if self.lengthscale_grid is not None:
            if len(self.lengthscale_grid) == 0 or any(v <= 0 for v in self.lengthscale_grid):
                raise ValueError("lengthscale_grid must hold positive values")


@dataclass(frozen=True)
class AcquisitionSpec:
    kind: str = "ei"
    xi: float = 0.01
    kappa: float = 2.0

    def __post_init__(self):
        if self.kind not in ("ei", "ucb"):
            raise ValueError(f"acquisition kind must be 'ei' or 'ucb', got {self.kind!r}")
        if self.xi < 0:
            raise ValueError("xi must be >= 0")
        if self.kappa <= 0:
            raise ValueError("kappa must be > 0")


def _sq_dists(a: np.ndarray, b: np.ndarray, lengthscale) -> np.ndarray:
    ls = np.asarray(lengthscale, dtype=np.float64)
    a = a / ls
    b = b / ls
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def kernel_matrix(spec: KernelSpec, a, b) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    return spec.signal_variance * np.exp(-0.5 * _sq_dists(a, b, spec.lengthscale))


def kernel_eval(spec: KernelSpec, x, x2) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    x2 = np.atleast_1d(np.asarray(x2, dtype=np.float64))
    if x.shape != x2.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x2.shape}")
    return float(kernel_matrix(spec, x[None, :], x2[None, :])[0, 0])


@dataclass(frozen=True)
class GpModel:
    """A fitted GP. Immutable; ``predict`` is safe to call concurrently."""

    x_train: np.ndarray
    y_train: np.ndarray  # standardized targets
    y_mean: float
    y_std: float
    kernel: KernelSpec
    chol: np.ndarray  # lower factor of K + (noise + jitter) I
    alpha_vec: np.ndarray
    jitter: float

    def predict(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance at the rows of ``x``, in target units."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        ks = kernel_matrix(self.kernel, self.x_train, x)
        mu = ks.T @ self.alpha_vec
        v = solve_triangular(self.chol, ks, lower=True, check_finite=False)
        var = self.kernel.signal_variance - np.einsum("ij,ij->j", v, v)
        var = np.maximum(var, 0.0)
        return self.y_mean + self.y_std * mu, var * self.y_std**2


def _factor(k: np.ndarray):
    n = k.shape[0]
    eye = np.eye(n)
    for jitter in JITTER_LADDER:
        try:
            return np.linalg.cholesky(k + jitter * eye), jitter
        except np.linalg.LinAlgError:
            continue
    raise GpFitError("GP fit failed")


def _fit_fixed(x, y_std_units, y_mean, y_std, spec: KernelSpec) -> GpModel:
    k = kernel_matrix(spec, x, x) + spec.noise_variance * np.eye(len(x))
    chol, jitter = _factor(k)
    alpha = cho_solve((chol, True), y_std_units, check_finite=False)
    return GpModel(
        x_train=x,
        y_train=y_std_units,
        y_mean=y_mean,
        y_std=y_std,
        kernel=spec,
        chol=chol,
        alpha_vec=alpha,
        jitter=jitter,
    )


def log_marginal_likelihood(model: GpModel) -> float:
    """Log evidence of the standardized targets under the fitted kernel."""
    n = len(model.y_train)
    return float(
        -0.5 * model.y_train @ model.alpha_vec
        - np.sum(np.log(np.diag(model.chol)))
        - 0.5 * n * np.log(2 * np.pi)
    )


def gp_fit(x, y, spec: KernelSpec = KernelSpec(), *, standardize: bool = True) -> GpModel:
    """Fit an exact GP to inputs ``x`` (n x d) and targets ``y`` (n,).

    Cholesky failures are retried with escalating diagonal jitter
    (1e-10 up to 1e-6) before giving up with :class:`GpFitError`.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape[0] == 0:
        raise ValueError("gp_fit needs at least one point")
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"{x.shape[0]} inputs but {y.shape[0]} targets")
    if not np.all(np.isfinite(y)) or not np.all(np.isfinite(x)):
        raise ValueError("non-finite training data")
    if standardize:
        y_mean = float(y.mean())
        y_std = float(y.std())
        if not y_std > 0:
            y_std = 1.0
    else:
        y_mean, y_std = 0.0, 1.0
    z = (y - y_mean) / y_std

    if spec.lengthscale_grid is None:
        return _fit_fixed(x, z, y_mean, y_std, spec)

    best, best_lml = None, -np.inf
    for ls in spec.lengthscale_grid:
        try:
            m = _fit_fixed(x, z, y_mean, y_std, replace(spec, lengthscale=float(ls)))
        except GpFitError:
            continue
        lml = log_marginal_likelihood(m)
        if lml > best_lml:
            best, best_lml = m, lml
    if best is None:
        raise GpFitError("GP fit failed")
    return best


def gp_predict(model: GpModel, x: Sequence[float]) -> tuple[float, float]:
    mu, var = model.predict(np.asarray(x, dtype=np.float64)[None, :])
    return float(mu[0]), float(var[0])


def expected_improvement(mu, sigma, f_best: float, xi: float = 0.01):
    """EI for maximization; reduces to ``max(0, mu - f_best - xi)`` at ``sigma == 0``."""
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if np.any(sigma < 0):
        raise ValueError("sigma must be >= 0")
    imp = mu - f_best - xi
    safe = np.where(sigma > 0, sigma, 1.0)
    z = imp / safe
    pdf = np.exp(-0.5 * z**2) / np.sqrt(2 * np.pi)
    ei = imp * ndtr(z) + safe * pdf
    ei = np.where(sigma > 0, np.maximum(ei, 0.0), np.maximum(imp, 0.0))
    return ei if ei.ndim else float(ei)


def ucb(mu, sigma, kappa: float = 2.0):
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if np.any(sigma < 0):
        raise ValueError("sigma must be >= 0")
    out = mu + kappa * sigma
    return out if out.ndim else float(out)


def acquisition(spec: AcquisitionSpec, mu, var, f_best: float) -> np.ndarray:
    """Score candidates given posterior mean and variance arrays."""
    sigma = np.sqrt(np.maximum(np.asarray(var, dtype=np.float64), 0.0))
    if spec.kind == "ei":
        return np.atleast_1d(expected_improvement(mu, sigma, f_best, spec.xi))
    return np.atleast_1d(ucb(mu, sigma, spec.kappa))
