"""Target distributions: potential, gradient, optional Hessian-vector product.

Each model owns its evaluation counters so the cost of pre/postprocessing and
every kick is captured at one choke point; potential-only calls never touch
the gradient counter.
"""
from __future__ import annotations

import copy
import math

import numpy as np

from .splitting import PhaseState


class TargetModel:
    """Base class for targets proportional to exp(-V(q)) with unit mass matrix.

    Subclasses implement ``_potential`` and ``_gradient`` and may override
    ``_hessian_vec`` (the default is a central finite difference of the
    gradient) and ``exact_sample``.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = int(dim)
        self.grad_evals = 0
        self.hess_evals = 0

    # -- capabilities -------------------------------------------------------

    def potential(self, q: np.ndarray) -> float:
        return self._potential(np.asarray(q, dtype=float))

    def gradient(self, q: np.ndarray) -> np.ndarray:
        self.grad_evals += 1
        return self._gradient(np.asarray(q, dtype=float))

    def hessian_vec(self, q: np.ndarray, v: np.ndarray) -> np.ndarray:
        self.hess_evals += 1
        return self._hessian_vec(np.asarray(q, dtype=float), np.asarray(v, dtype=float))

    def inv_mass_apply(self, p: np.ndarray) -> np.ndarray:
        return p

    def exact_sample(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no exact sampler")

    @property
    def has_exact_sampler(self) -> bool:
        return type(self).exact_sample is not TargetModel.exact_sample

    def fresh(self) -> "TargetModel":
        """Copy with zeroed counters; each chain owns its own instance."""
        other = copy.copy(self)
        other.grad_evals = 0
        other.hess_evals = 0
        return other

    # -- implementation hooks ------------------------------------------------

    def _potential(self, q: np.ndarray) -> float:
        raise NotImplementedError

    def _gradient(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _hessian_vec(self, q: np.ndarray, v: np.ndarray) -> np.ndarray:
        # Central difference of the gradient with step sqrt(eps)*(1 + |q|_inf).
        # Uses the raw gradient hook so the fallback does not inflate the
        # user-visible gradient counter (a Hessian-vector product is billed
        # as one hess_evals unit regardless of how it is obtained).
        scale = float(np.max(np.abs(v))) if v.size else 0.0
        if scale == 0.0 or not math.isfinite(scale):
            return np.zeros_like(q)
        u = v / scale
        eps = math.sqrt(np.finfo(float).eps) * (1.0 + float(np.max(np.abs(q))))
        diff = self._gradient(q + eps * u) - self._gradient(q - eps * u)
        return scale * diff / (2.0 * eps)


class GaussianModel(TargetModel):
    """Diagonal Gaussian benchmark: V(q) = (1/2) sum_j j^2 q_j^2.

    Mode j is a harmonic oscillator of frequency j, so a step h acts on mode
    j like a step h*j on the unit oscillator; the stiffest mode governs
    stability.
    """

    def __init__(self, dim: int):
        super().__init__(dim)
        self.frequencies = np.arange(1, self.dim + 1, dtype=float)
        self.precisions = self.frequencies**2

    def _potential(self, q: np.ndarray) -> float:
        return 0.5 * float(np.dot(self.precisions, q * q))

    def _gradient(self, q: np.ndarray) -> np.ndarray:
        return self.precisions * q

    def _hessian_vec(self, q: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.precisions * v

    def exact_sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(self.dim) / self.frequencies

    def exact_flow(self, state: PhaseState, t: float) -> PhaseState:
        """Exact dynamics: mode j rotates by angle j*t; conserves energy."""
        ang = self.frequencies * t
        cos, sin = np.cos(ang), np.sin(ang)
        q = state.q * cos + state.p / self.frequencies * sin
        p = -self.frequencies * state.q * sin + state.p * cos
        return PhaseState(q, p)


class AnharmonicModel(TargetModel):
    """Quartic test bed: V(q) = sum_j (q_j^2/2 + q_j^4/4)."""

    def _potential(self, q: np.ndarray) -> float:
        return float(np.sum(0.5 * q * q + 0.25 * q**4))

    def _gradient(self, q: np.ndarray) -> np.ndarray:
        return q + q**3

    def _hessian_vec(self, q: np.ndarray, v: np.ndarray) -> np.ndarray:
        return (1.0 + 3.0 * q * q) * v


def gaussian_model(dim: int) -> GaussianModel:
    return GaussianModel(dim)


def oscillator_1d() -> GaussianModel:
    """The one-dimensional model oscillator, V(q) = q^2/2."""
    return GaussianModel(1)


def anharmonic_model(dim: int) -> AnharmonicModel:
    return AnharmonicModel(dim)
