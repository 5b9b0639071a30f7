"""Parameter sets behind the reproducible figures.

Each preset is a pure function of the frequency convention.  Values quoted
as bare frequencies ("10 MHz", "0.1 omega_m") scale with the convention;
values quoted with an explicit 2*pi factor are already angular and do not.

Preset contents (version 1):

* ``fig2a``: single cavity, L = 1 mm, m = 10 ng, lambda = 794.98 nm,
  omega_m = 10 MHz, k_A = 0.1 omega_m, Q = 1e7; detuning sweeps over
  Delta_A in [0, 2 omega_m] at 0.3, 3 and 7 uW.
* ``fig2b``: as ``fig2a`` with Delta_A = omega_m; power sweeps up and down
  over [0, 60] uW.
* ``fig3a``: ``fig2a`` plus J = omega_m, g_at = 2*pi kHz, k_C = 0.1 omega_m,
  N = 1e8, gamma_at = 2*pi x 2.875 MHz, Delta_C = omega_m; detuning sweeps
  at 20 uW for Delta_at / gamma_at in (-50, -20, 0, 10).
* ``fig3b``: ``fig3a`` at Delta_A = omega_m; power sweeps for the same
  Delta_at values.
* ``fig4``: ``fig3b`` parameters; threshold map over 25 values of
  Delta_at / gamma_at in [-100, 20] and 20 log-spaced values of
  k_C / omega_m in [0.01, 1].
* ``fig5``: dimensionless linearized model with gamma_m = 1e-5,
  k_A = 100, k_C = 1, gamma_at = 1e3, g_at = 0.1, Delta = Delta_C = 1,
  Delta_at = 100, J = 200, G = 50, n_th = 1e4 (all in units of omega_m),
  detunings taken as laser minus cavity; 401 samples over t in [0, 4e4].
  The single-cavity variant sets J = 0 and G = 0.1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .cooling import LinearizedParams
from .errors import ParameterError
from .params import PhysicalParams

PRESET_VERSION = 1
PRESET_NAMES = ("fig2a", "fig2b", "fig3a", "fig3b", "fig4", "fig5")

FIG2_POWERS = (0.3e-6, 3e-6, 7e-6)
FIG3_POWER = 20e-6
FIG3_DELTA_AT = (-50.0, -20.0, 0.0, 10.0)  # in units of gamma_at
FIG4_DELTA_AT_AXIS = tuple(np.linspace(-100.0, 20.0, 25))
FIG4_KC_AXIS = tuple(np.geomspace(0.01, 1.0, 20))
FIG5_T_FINAL = 4.0e4
FIG5_SAMPLES = 401


@dataclass(frozen=True)
class Preset:
    name: str
    command: str
    traces: tuple[tuple[str, Any], ...]
    options: dict[str, Any] = field(default_factory=dict)


def _unit(freq_convention: str) -> float:
    if freq_convention not in ("angular", "ordinary"):
        raise ParameterError(
            f"unknown freq_convention {freq_convention!r}", {"freq_convention": "must be angular or ordinary"}
        )
    return 2.0 * math.pi if freq_convention == "ordinary" else 1.0


def fig2_params(freq_convention: str = "angular", input_power: float = 7e-6) -> PhysicalParams:
    wm = 1e7 * _unit(freq_convention)
    return PhysicalParams(
        cavity_length=1e-3,
        mirror_mass=1e-11,
        laser_wavelength=794.98e-9,
        mech_freq=wm,
        mech_quality=1e7,
        optical_decay_A=0.1 * wm,
        detuning_A=wm,
        input_power=input_power,
        freq_convention=freq_convention,
    )


def fig3_params(freq_convention: str = "angular", delta_at_over_gamma: float = 0.0) -> PhysicalParams:
    base = fig2_params(freq_convention, FIG3_POWER)
    wm = base.mech_freq
    gamma_at = 2.0 * math.pi * 2.875e6
    return base.replace(
        cavity_coupling=wm,
        atom_coupling=2.0 * math.pi * 1e3,
        optical_decay_C=0.1 * wm,
        atom_number=1e8,
        atom_decay=gamma_at,
        atom_detuning=delta_at_over_gamma * gamma_at,
        detuning_C=wm,
    )


def fig5_params(single_cavity: bool = False) -> LinearizedParams:
    p = LinearizedParams(
        delta=1.0,
        delta_C=1.0,
        delta_at=100.0,
        kappa_A=100.0,
        kappa_C=1.0,
        gamma_at=1e3,
        gamma_m=1e-5,
        g_at=0.1,
        J=200.0,
        G=50.0,
        n_th=1e4,
        detuning_convention="laser_minus_cavity",
    )
    return single_cavity_variant(p) if single_cavity else p


def single_cavity_variant(p: LinearizedParams) -> LinearizedParams:
    """Remove the feedback cavity and weaken the optomechanical coupling to 0.1 omega_m."""
    return p.replace(J=0.0, G=0.1)


def get_preset(name: str, freq_convention: str = "angular") -> Preset:
    if name == "fig2a":
        traces = tuple((f"P={p!r}W", fig2_params(freq_convention, p)) for p in FIG2_POWERS)
        return Preset(name, "sweep-detuning", traces, {"range": (0.0, 2.0), "n_points": 2000})
    if name == "fig2b":
        return Preset(
            name, "sweep-power", (("single_cavity", fig2_params(freq_convention)),),
            {"range": (0.0, 60e-6), "n_points": 2000, "directions": ("up", "down")},
        )
    if name in ("fig3a", "fig3b"):
        traces = tuple(
            (f"delta_at={d!r}gamma_at", fig3_params(freq_convention, d)) for d in FIG3_DELTA_AT
        )
        if name == "fig3a":
            return Preset(name, "sweep-detuning", traces, {"range": (0.0, 2.0), "n_points": 2000})
        return Preset(
            name, "sweep-power", traces,
            {"range": (0.0, 60e-6), "n_points": 2000, "directions": ("up", "down")},
        )
    if name == "fig4":
        return Preset(
            name, "threshold-map", (("hybrid", fig3_params(freq_convention)),),
            {"delta_at_axis": FIG4_DELTA_AT_AXIS, "kC_axis": FIG4_KC_AXIS},
        )
    if name == "fig5":
        return Preset(
            name, "cool", (("hybrid", fig5_params()),),
            {"t_final": FIG5_T_FINAL, "samples": FIG5_SAMPLES},
        )
    raise ParameterError(f"unknown preset {name!r}", {"preset": f"must be one of {PRESET_NAMES}"})
