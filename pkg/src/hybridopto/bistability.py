"""Steady states of the driven optomechanical cavity and their bistability.

The mean intracavity photon number ``n`` solves

    n * (k_new**2 + (delta_new - omega_m * chi**2 * n)**2) = |eps_A|**2

Internally the cubic is solved in the dimensionless shift ``y = chi**2 * n``
with rates in units of ``omega_m``, which keeps coefficients of order one even
when ``n`` spans many decades.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import NoThresholdError, ParameterError
from .params import (
    EffectiveCavityResponse,
    PhysicalParams,
    drive_amplitude,
    effective_response,
    power_for_drive,
    scaled_coupling,
)

STABLE = "stable"
UNSTABLE = "unstable"


@dataclass(frozen=True)
class SteadyStateRoot:
    n: float
    stability: str
    a_S: complex
    Q_S: float
    P_S: float
    residual: float

    @property
    def stable(self) -> bool:
        return self.stability == STABLE


@dataclass(frozen=True)
class SteadyStateSolution:
    roots: tuple[SteadyStateRoot, ...]
    eps_sq: float

    @property
    def photon_numbers(self) -> list[float]:
        return [r.n for r in self.roots]

    @property
    def stabilities(self) -> list[str]:
        return [r.stability for r in self.roots]

    def relative_residuals(self) -> list[float]:
        scale = self.eps_sq if self.eps_sq > 0 else 1.0
        return [abs(r.residual) / scale for r in self.roots]

    def to_json(self) -> dict:
        return {
            "eps_sq": self.eps_sq,
            "roots": [
                {
                    "n": r.n,
                    "stability": r.stability,
                    "a_S": [r.a_S.real, r.a_S.imag],
                    "Q_S": r.Q_S,
                    "P_S": r.P_S,
                    "residual": r.residual,
                }
                for r in self.roots
            ],
        }


@dataclass(frozen=True)
class TurningPoints:
    """Photon numbers where ``d|eps_A|^2/dn`` vanishes; both None when there are none."""

    n_minus: float | None = None
    n_plus: float | None = None

    @property
    def exists(self) -> bool:
        return self.n_minus is not None


class Threshold(NamedTuple):
    P_th: float
    n_th: float


class Window(NamedTuple):
    P_low: float
    P_high: float


def _check_inputs(resp: EffectiveCavityResponse, chi: float, omega_m: float) -> None:
    bad = {}
    for name, v in (("k_new", resp.k_new), ("delta_new", resp.delta_new), ("chi", chi), ("omega_m", omega_m)):
        if not math.isfinite(v):
            bad[name] = "not finite"
    if resp.k_new <= 0:
        bad["k_new"] = "must be > 0 (feedback removed all cavity damping)"
    if chi < 0:
        bad["chi"] = "must be >= 0"
    if omega_m <= 0:
        bad["omega_m"] = "must be > 0"
    if bad:
        raise ParameterError("invalid steady-state inputs: " + ", ".join(bad), bad)


def intensity_slope(y, k: float, d: float):
    """``d e/d y`` of ``e(y) = y*(k**2 + (d - y)**2)``; negative on the unstable branch."""
    return k * k + (d - y) * (d - 3.0 * y)


def steady_state_roots(
    resp: EffectiveCavityResponse, chi: float, omega_m: float, eps_A: float
) -> SteadyStateSolution:
    _check_inputs(resp, chi, omega_m)
    if not math.isfinite(eps_A) or eps_A < 0:
        raise ParameterError("eps_A must be finite and >= 0", {"eps_A": "invalid"})
    eps_sq = eps_A * eps_A
    k, delta = resp.k_new, resp.delta_new

    if chi == 0.0:
        ns = [eps_sq / (k * k + delta * delta)]
        labels = [STABLE]
    else:
        kt, dt = k / omega_m, delta / omega_m
        e = chi * chi * eps_sq / (omega_m * omega_m)
        roots, counts = kernels.cubic_roots(kt, dt, e)
        if counts[0] < 0:
            raise ParameterError("non-finite cubic coefficients", {"cubic": "non-finite"})
        ys = roots[0, : counts[0]]
        ns = [float(y) / (chi * chi) for y in ys]
        labels = [UNSTABLE if intensity_slope(y, kt, dt) < 0 else STABLE for y in ys]

    out = []
    for n, label in zip(ns, labels):
        detuning = delta - omega_m * chi * chi * n
        a_s = eps_A / complex(k, detuning)
        residual = n * (k * k + detuning * detuning) - eps_sq
        out.append(SteadyStateRoot(n=n, stability=label, a_S=a_s, Q_S=chi * n, P_S=0.0, residual=residual))
    return SteadyStateSolution(roots=tuple(out), eps_sq=eps_sq)


def solve_params(params: PhysicalParams) -> SteadyStateSolution:
    return steady_state_roots(
        effective_response(params), scaled_coupling(params), params.mech_freq, drive_amplitude(params)
    )


def turning_points(resp: EffectiveCavityResponse, chi: float, omega_m: float) -> TurningPoints:
    _check_inputs(resp, chi, omega_m)
    if chi == 0.0:
        return TurningPoints()
    k, d = resp.k_new, resp.delta_new
    disc = d * d - 3.0 * k * k
    scale = 3.0 * omega_m * chi * chi
    if abs(disc) <= 1e-12 * max(d * d, 3.0 * k * k):
        if d <= 0:
            return TurningPoints()
        n = 2.0 * d / scale
        return TurningPoints(n, n)
    if disc < 0 or d <= 0:
        return TurningPoints()
    root = math.sqrt(disc)
    return TurningPoints((2.0 * d - root) / scale, (2.0 * d + root) / scale)


def expanded_condition(resp: EffectiveCavityResponse) -> float:
    """Left-hand side of the bistability inequality written in the bare parameters."""
    kA, dA, J = resp.kappa_A, resp.delta_A, resp.J
    if J == 0.0:
        return dA * dA - 3.0 * kA * kA
    den = resp.A1 ** 2 + resp.A2 ** 2
    x = resp.delta_at * resp.A1 - resp.gamma_at * resp.A2
    y = resp.gamma_at * resp.A1 + resp.delta_at * resp.A2
    j2 = J * J / den
    return (
        dA * dA
        - 3.0 * kA * kA
        + j2 * j2 * x * x
        - 3.0 * j2 * j2 * y * y
        - 6.0 * kA * j2 * y
        + 2.0 * dA * j2 * x
    )


def _expanded_scale(resp: EffectiveCavityResponse) -> float:
    kA, dA, J = abs(resp.kappa_A), abs(resp.delta_A), resp.J
    if J == 0.0:
        return dA * dA + 3.0 * kA * kA
    den = resp.A1 ** 2 + resp.A2 ** 2
    x = abs(resp.delta_at * resp.A1) + abs(resp.gamma_at * resp.A2)
    y = abs(resp.gamma_at * resp.A1) + abs(resp.delta_at * resp.A2)
    j2 = J * J / den
    return dA * dA + 3 * kA * kA + j2 * j2 * (x * x + 3 * y * y) + j2 * (6 * kA * y + 2 * dA * x)


def is_bistable(resp: EffectiveCavityResponse) -> bool:
    """True when the dressed cavity supports an S-shaped intensity curve.

    The compact discriminant and the expanded inequality are both evaluated;
    they must agree unless the value sits within rounding of zero, in which
    case the compact form decides.  A positive dressed detuning is also
    required so that the turning points lie at positive photon number.
    """
    compact = resp.delta_new ** 2 - 3.0 * resp.k_new ** 2
    expanded = expanded_condition(resp)
    tol = 1e-9 * _expanded_scale(resp)
    if (compact > 0) != (expanded > 0) and abs(compact) > tol and abs(expanded) > tol:
        raise ArithmeticError(
            f"compact ({compact!r}) and expanded ({expanded!r}) bistability conditions disagree"
        )
    return compact > 0 and resp.delta_new > 0


def fold_drive_sq(resp: EffectiveCavityResponse, chi: float, omega_m: float, n: float) -> float:
    """``|eps_A|^2`` that places a root of the intensity cubic at ``n``."""
    detuning = resp.delta_new - omega_m * chi * chi * n
    return n * (resp.k_new ** 2 + detuning ** 2)


def threshold_power(params: PhysicalParams) -> Threshold:
    """Input power at the upper fold of the S-curve and the photon number there.

    Uses the minus root of the turning-point quadratic with the bracket of the
    intensity cubic squared.
    """
    resp = effective_response(params)
    if not is_bistable(resp):
        raise NoThresholdError("parameters are not bistable; no threshold power")
    chi = scaled_coupling(params)
    tp = turning_points(resp, chi, params.mech_freq)
    n_th = tp.n_minus
    return Threshold(power_for_drive(params, fold_drive_sq(resp, chi, params.mech_freq, n_th)), n_th)


def bistable_window(params: PhysicalParams) -> Window:
    """Input powers bounding the three-root region (lower and upper fold)."""
    resp = effective_response(params)
    if not is_bistable(resp):
        raise NoThresholdError("parameters are not bistable; no bistable window")
    chi = scaled_coupling(params)
    wm = params.mech_freq
    tp = turning_points(resp, chi, wm)
    p_high = power_for_drive(params, fold_drive_sq(resp, chi, wm, tp.n_minus))
    p_low = power_for_drive(params, fold_drive_sq(resp, chi, wm, tp.n_plus))
    return Window(min(p_low, p_high), p_high)


def roots_batch(k_scaled, d_scaled, drive_scaled):
    """Vectorized roots in the scaled variable ``y``.

    Returns ``(y, stable, counts)``: ``y`` has shape ``(N, 3)`` NaN-padded and
    ``stable`` is a boolean array of the same shape (False where padded).
    """
    k, d, e = (np.array(a).ravel() for a in np.broadcast_arrays(
        np.asarray(k_scaled, dtype=float), np.asarray(d_scaled, dtype=float), np.asarray(drive_scaled, dtype=float)))
    roots, counts = kernels.cubic_roots(k, d, e)
    with np.errstate(invalid="ignore"):
        slope = intensity_slope(roots, k[:, None], d[:, None])
    stable = np.isfinite(roots) & ~(slope < 0)
    return roots, stable, counts
