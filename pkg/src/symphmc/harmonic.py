"""Transfer-matrix analysis of schedules on the unit harmonic oscillator.

On the model Hamiltonian p^2/2 + q^2/2 every drift and kick is a 2x2 shear,
so a schedule becomes a 2x2 map with unit determinant.  A stable palindromic
kernel factors as rotation-like with eccentricity chi and angle theta per
step; processors contribute polynomial entries (alpha, beta; gamma, delta).
From those pieces we get the expected energy error of a leg at stationarity
and its N-independent upper bound rho_h, whose maximum over a step-size
budget is the tuning objective.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import UnstableStep
from .splitting import ElementaryFlow, FlowKind, FlowSchedule, ProcessedIntegrator

Entries = tuple  # (m11, m12, m21, m22), scalars or elementwise arrays

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TransferMatrix:
    m11: float
    m12: float
    m21: float
    m22: float

    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        return TransferMatrix(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )


@dataclass(frozen=True)
class KernelSpectrum:
    """(chi, theta) of a stable kernel step; chi/theta are None when unstable."""

    chi: Optional[float]
    theta: Optional[float]
    stable: bool


@dataclass(frozen=True)
class ProcessorPolys:
    """Preprocessor matrix entries [[alpha, beta], [gamma, delta]] at a given h."""

    alpha: float
    beta: float
    gamma: float
    delta: float


def _schedule_entries(schedule: FlowSchedule, h: Union[float, np.ndarray]) -> Entries:
    """Entries of the schedule's oscillator map; h may be a scalar or array."""
    m11, m12, m21, m22 = 1.0, 0.0, 0.0, 1.0
    for f in schedule:
        c = f.coefficient * h
        if f.kind is FlowKind.DRIFT:
            m11 = m11 + c * m21
            m12 = m12 + c * m22
        elif f.kind is FlowKind.KICK:
            m21 = m21 - c * m11
            m22 = m22 - c * m12
        else:
            raise ValueError(
                "modified kicks have no fixed oscillator shear; "
                "see the fourth-order module for their effective coefficient"
            )
    return m11, m12, m21, m22


def flow_matrix(f: ElementaryFlow, h: float) -> TransferMatrix:
    """Shear of a single drift or kick: [[1, ah], [0, 1]] or [[1, 0], [-bh, 1]]."""
    return TransferMatrix(*_schedule_entries(FlowSchedule((f,)), h))


def schedule_matrix(schedule: FlowSchedule, h: float) -> TransferMatrix:
    """Ordered product of the flow shears, in the order the flows act."""
    return TransferMatrix(*_schedule_entries(schedule, h))


def processor_polys(pre: FlowSchedule, h: float) -> ProcessorPolys:
    m = schedule_matrix(pre, h)
    return ProcessorPolys(m.m11, m.m12, m.m21, m.m22)


def _is_stable(m11, m12, m21) -> bool:
    # Strict inequality: the |m11| = 1 boundary is treated as unstable.
    return bool(abs(m11) < 1.0 and (m12 * m21) < 0.0)


def spectrum(m: TransferMatrix) -> KernelSpectrum:
    """Stability and (chi, theta) of a palindromic kernel matrix (m11 == m22).

    chi = sqrt(m12 / -m21) > 0 and theta = arccos(m11) in (0, pi), so that
    m = [[cos theta, chi sin theta], [-sin theta / chi, cos theta]].
    Instability is reported through the ``stable`` flag, not an exception.
    """
    if not _is_stable(m.m11, m.m12, m.m21):
        return KernelSpectrum(None, None, False)
    chi = math.sqrt(m.m12 / -m.m21)
    theta = math.acos(max(-1.0, min(1.0, m.m11)))
    return KernelSpectrum(chi, theta, True)


def _first_instability(kernel: FlowSchedule, scan_step: float, h_cap: float) -> Optional[tuple[float, float]]:
    """(last stable h, first unstable h) of the scan grid, or None if stable throughout."""
    chunk = 5000
    prev_stable = 0.0
    n_total = int(round(h_cap / scan_step))
    for start in range(1, n_total + 1, chunk):
        stop = min(start + chunk, n_total + 1)
        hs = np.arange(start, stop, dtype=float) * scan_step
        m11, m12, m21, _ = _schedule_entries(kernel, hs)
        stable = (np.abs(m11) < 1.0) & ((m12 * m21) < 0.0)
        if stable.all():
            prev_stable = float(hs[-1])
            continue
        idx = int(np.argmin(stable))
        lo = float(hs[idx - 1]) if idx > 0 else prev_stable
        return lo, float(hs[idx])
    return None


def stability_length(kernel: FlowSchedule, scan_step: float = 1e-3, tol: float = 1e-6) -> float:
    """Supremum h_s of step sizes below which the kernel map stays power
    bounded: scan in steps of ``scan_step``, then bisect the first crossing
    down to absolute tolerance ``tol``."""
    bracket = _first_instability(kernel, scan_step, h_cap=1000.0)
    if bracket is None:
        return math.inf
    lo, hi = bracket
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        m11, m12, m21, _ = _schedule_entries(kernel, mid)
        if _is_stable(m11, m12, m21):
            lo = mid
        else:
            hi = mid
    if hi <= tol:
        return 0.0
    return 0.5 * (lo + hi)


def _sandwich(
    alpha: float, beta: float, gamma: float, delta: float, chi: float, big_c: float, big_s: float
) -> tuple[float, float, float]:
    """Closed-form entries (A, B, C) of post . kernel^N . pre on the oscillator."""
    inv_chi = 1.0 / chi
    a_ = big_c * (alpha * delta + beta * gamma) + big_s * (gamma * delta * chi - alpha * beta * inv_chi)
    b_ = big_c * (2.0 * beta * delta) + big_s * (delta * delta * chi - beta * beta * inv_chi)
    c_ = big_c * (2.0 * alpha * gamma) + big_s * (gamma * gamma * chi - alpha * alpha * inv_chi)
    return a_, b_, c_


def leg_matrix(integ: ProcessedIntegrator, h: float, n_steps: int) -> TransferMatrix:
    """Oscillator map of a whole processed leg at step h with N kernel steps.

    Uses the signed per-step angle: in the upper stretch of the stability
    interval the kernel's m12 turns negative (rotation angle past pi), and
    there sin(theta) carries the sign of m12 while chi stays positive.
    """
    kernel = schedule_matrix(integ.kernel, h)
    sp = spectrum(kernel)
    if not sp.stable:
        raise UnstableStep(f"kernel unstable at h = {h}")
    theta = math.copysign(sp.theta, kernel.m12)
    big_c = math.cos(n_steps * theta)
    big_s = math.sin(n_steps * theta)
    polys = processor_polys(integ.pre, h)
    a_, b_, c_ = _sandwich(polys.alpha, polys.beta, polys.gamma, polys.delta, sp.chi, big_c, big_s)
    return TransferMatrix(a_, b_, c_, a_)


def expected_energy_error(m: TransferMatrix) -> float:
    """Expected energy change over a leg at stationarity: (1/2)(B + C)^2."""
    s = m.m12 + m.m21
    return 0.5 * s * s


def rho(integ: ProcessedIntegrator, h: float) -> float:
    """N-independent upper bound on the expected leg energy error at step h.

    Returns +inf when the kernel is unstable at h, so the tuner's objective
    stays totally ordered.
    """
    k11, k12, k21, _ = _schedule_entries(integ.kernel, h)
    if not _is_stable(k11, k12, k21):
        return math.inf
    chi = math.sqrt(k12 / -k21)
    alpha, beta, gamma, delta = _schedule_entries(integ.pre, h)
    cross = alpha * gamma + beta * delta
    spread = (delta * delta + gamma * gamma) * chi - (alpha * alpha + beta * beta) / chi
    return 2.0 * cross * cross + 0.5 * spread * spread


def _golden_max(f: Callable[[float], float], a: float, b: float, xtol: float) -> float:
    """Golden-section maximization of a smooth scalar function on [a, b]."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    best = max(fc, fd)
    while (b - a) > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
        best = max(best, fc, fd)
    return best


def _rho_profile(
    integ: ProcessedIntegrator,
    hbar: float,
    grid_points: int = 10_000,
    xtol: float = 1e-8,
) -> tuple[float, float, float]:
    """(max over (0, hbar], value at hbar, max over interior local maxima).

    Evaluates rho on a uniform grid and refines each grid-local maximum by
    golden section.  All three values are +inf if any grid point is unstable.
    """
    if not (hbar > 0.0 and math.isfinite(hbar)):
        raise ValueError("hbar must be positive and finite")
    n = max(2, int(grid_points))
    hs = np.linspace(hbar / n, hbar, n)

    k11, k12, k21, _ = _schedule_entries(integ.kernel, hs)
    stable = (np.abs(k11) < 1.0) & ((k12 * k21) < 0.0)
    if not stable.all():
        return math.inf, math.inf, math.inf
    chi = np.sqrt(k12 / -k21)
    alpha, beta, gamma, delta = _schedule_entries(integ.pre, hs)
    cross = alpha * gamma + beta * delta
    spread = (delta * delta + gamma * gamma) * chi - (alpha * alpha + beta * beta) / chi
    vals = 2.0 * cross * cross + 0.5 * spread * spread

    grid_max = float(vals.max())
    at_hbar = float(vals[-1])

    is_peak = np.empty(n, dtype=bool)
    is_peak[0] = vals[0] >= vals[1]
    is_peak[-1] = vals[-1] >= vals[-2]
    is_peak[1:-1] = (vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:])
    # Roundoff jitter on the tiny-h plateau flags spurious maxima; peaks this
    # far below the grid maximum cannot refine past it, so skip them.
    threshold = grid_max * 1e-3

    norm = grid_max
    interior = -math.inf

    def f(x: float) -> float:
        return rho(integ, x)

    for i in np.nonzero(is_peak & (vals >= threshold))[0]:
        lo = float(hs[i - 1]) if i > 0 else 0.5 * float(hs[0])
        hi = float(hs[i + 1]) if i < n - 1 else hbar
        refined = _golden_max(f, lo, hi, xtol)
        norm = max(norm, refined)
        if i < n - 1:
            interior = max(interior, refined)
    return norm, at_hbar, interior


def rho_norm(integ: ProcessedIntegrator, hbar: float, grid_points: int = 10_000) -> float:
    """max of rho over (0, hbar]; +inf if the kernel loses stability inside."""
    norm, _, _ = _rho_profile(integ, hbar, grid_points)
    return norm
