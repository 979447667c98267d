"""Closed-form oracles for the channel transit (hbar = m = 1).

A beam of momentum p entering a channel of width a propagates in the ground
transverse mode with reduced longitudinal momentum p' = sqrt(p^2 - (pi/a)^2);
the first-order expansion p - pi^2/(2 a^2 p) and the phase shifts built from
both forms are the quantities the experiments are checked against. A 1D
transfer-matrix transmission through a rectangular step of the equivalent
height pi^2/(2 a^2) provides an independent oracle for the adiabatic
reduction of the channel.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import BelowCutoffError, InvalidArgumentError


@dataclass(frozen=True)
class BeamParams:
    """Free-space beam momentum and derived wavelength / energy."""

    p: float

    def __post_init__(self):
        if self.p <= 0:
            raise InvalidArgumentError(f"beam momentum must be positive, got {self.p}")

    @property
    def wavelength(self) -> float:
        return 2 * math.pi / self.p

    @property
    def energy(self) -> float:
        return self.p * self.p / 2


def _check_pa(p: float, a: float):
    if p <= 0 or a <= 0:
        raise InvalidArgumentError(f"need p > 0 and a > 0, got p={p}, a={a}")


def mode_cutoff(a: float, n: int = 1) -> float:
    """Minimum longitudinal momentum for transverse mode n: n*pi/a."""
    if a <= 0 or n < 1:
        raise InvalidArgumentError(f"need a > 0 and n >= 1, got a={a}, n={n}")
    return n * math.pi / a


def reduced_momentum_exact(p: float, a: float) -> float | None:
    """sqrt(p^2 - (pi/a)^2): in-channel momentum of the ground mode.

    Returns None when the mode is evanescent (p below cutoff); exactly at
    cutoff the marginal value 0.0 is returned.
    """
    _check_pa(p, a)
    cut = mode_cutoff(a)
    if p < cut:
        return None
    return math.sqrt(max(p * p - cut * cut, 0.0))


def reduced_momentum_approx(p: float, a: float) -> float:
    """First-order expansion p - pi^2/(2 a^2 p). Valid above cutoff only."""
    _check_pa(p, a)
    if p <= mode_cutoff(a):
        raise BelowCutoffError(f"p={p} at or below cutoff pi/a={mode_cutoff(a):.6g}; expansion invalid")
    return p - math.pi**2 / (2 * a * a * p)


def effective_step_height(a: float) -> float:
    """Transverse ground-mode zero-point energy pi^2/(2 a^2), the equivalent
    longitudinal potential step."""
    if a <= 0:
        raise InvalidArgumentError(f"need a > 0, got a={a}")
    return math.pi**2 / (2 * a * a)


def phase_shift_approx(p: float, ell: float, a: float) -> float:
    """First-order confinement phase shift pi^2 ell / (2 a^2 p).

    Equal to (pi/4) * lambda * ell / a^2 with lambda = 2 pi / p; both forms
    are evaluated and must agree to rounding.
    """
    _check_pa(p, a)
    if ell < 0:
        raise InvalidArgumentError(f"need ell >= 0, got {ell}")
    if p <= mode_cutoff(a):
        raise BelowCutoffError(f"p={p} at or below cutoff pi/a={mode_cutoff(a):.6g}")
    form_momentum = math.pi**2 * ell / (2 * a * a * p)
    wavelength = 2 * math.pi / p
    form_wavelength = (math.pi / 4) * wavelength * ell / (a * a)
    assert abs(form_momentum - form_wavelength) <= 1e-12 * max(1.0, abs(form_momentum))
    return form_momentum


def phase_shift_exact_mode(p: float, ell: float, a: float) -> float:
    """(p - p') * ell with the unexpanded reduced momentum."""
    _check_pa(p, a)
    if ell < 0:
        raise InvalidArgumentError(f"need ell >= 0, got {ell}")
    p_red = reduced_momentum_exact(p, a)
    if p_red is None or p_red == 0.0:
        raise BelowCutoffError(f"p={p} at or below cutoff pi/a={mode_cutoff(a):.6g}")
    return (p - p_red) * ell


def step_transmission_1d(p: float, v0: float, ell: float) -> tuple[complex, complex]:
    """Exact 1D amplitudes (t, r) for a rectangular region of height v0 and
    length ell, with the free phase e^{i p ell} divided out of t so that
    v0 = 0 gives t = 1 exactly. Tunneling (E < v0) is allowed.

    Flux unitarity |t|^2 + |r|^2 = 1 holds for propagating exits.
    """
    if p <= 0:
        raise InvalidArgumentError(f"need p > 0, got {p}")
    if ell < 0:
        raise InvalidArgumentError(f"need ell >= 0, got {ell}")
    k = complex(p)
    q = cmath.sqrt(complex(p * p - 2 * v0))
    if ell == 0:
        return 1.0 + 0j, 0.0 + 0j
    free = cmath.exp(-1j * k * ell)
    if abs(q) == 0:  # exactly at the step top: q -> 0 limit of the matching
        tau = 1.0 / (1.0 - 1j * k * ell / 2)
        return free * tau, tau * (-1j * k * ell / 2)
    cos_q = cmath.cos(q * ell)
    sin_q = cmath.sin(q * ell)
    denom = cos_q - 1j * (k * k + q * q) / (2 * k * q) * sin_q
    t = free / denom
    r = (-1j) * (k * k - q * q) / (2 * k * q) * sin_q / denom
    return t, r


def transmission_phase_1d(p: float, v0: float, ell: float, n_substeps: int = 200) -> float:
    """Confinement phase of the 1D step oracle: -arg(t), unwrapped by
    continuity in ell from ell = 0.

    For p^2 > 2 v0 and large ell this tends to (p - sqrt(p^2 - 2 v0)) * ell
    with a Fabry-Perot ripple bounded by the reflection amplitude.
    """
    if n_substeps < 2:
        raise InvalidArgumentError("need at least 2 unwrap substeps")
    ells = np.linspace(0.0, ell, n_substeps)
    phases = np.array([-cmath.phase(step_transmission_1d(p, v0, le)[0]) for le in ells])
    return float(np.unwrap(phases)[-1])


def unwrap_by_continuity(values, expected=None) -> np.ndarray:
    """Resolve 2*pi ambiguities in a sweep of principal-value phases.

    Points are visited in order of ascending |expected| magnitude (the
    analytic prediction for each sweep member) so the anchor is the member
    whose phase is safely principal; each value is then shifted to the branch
    nearest its predecessor. With no `expected`, input order is used.
    """
    vals = np.asarray(values, dtype=float).copy()
    order = np.argsort(np.abs(expected)) if expected is not None else np.arange(vals.size)
    prev = None
    for idx in order:
        if prev is not None:
            vals[idx] += 2 * math.pi * round((prev - vals[idx]) / (2 * math.pi))
        prev = vals[idx]
    return vals
