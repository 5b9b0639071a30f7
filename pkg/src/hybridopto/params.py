"""Physical parameters of the hybrid cavity and the quantities derived from them.

All :class:`PhysicalParams` fields are SI, with every rate, detuning and
coupling stored as an angular frequency in rad/s.  Configuration documents
may quote frequencies either as angular values (``freq_convention="angular"``,
the default) or as ordinary frequencies in Hz (``"ordinary"``), in which case
they are multiplied by 2*pi on ingestion.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Mapping

from .errors import ParameterError, SingularResponseError

HBAR = 1.0545718e-34  # J s
C_LIGHT = 299792458.0  # m / s

FREQ_CONVENTIONS = ("angular", "ordinary")

# Fields holding a frequency-like value (rad/s once ingested).
FREQ_FIELDS = (
    "mech_freq",
    "optical_decay_A",
    "optical_decay_C",
    "detuning_A",
    "detuning_C",
    "atom_detuning",
    "atom_decay",
    "atom_coupling",
    "cavity_coupling",
    "gamma_m",
    "cavity_freq",
)

REQUIRED_FIELDS = (
    "cavity_length",
    "mirror_mass",
    "laser_wavelength",
    "mech_freq",
    "optical_decay_A",
    "detuning_A",
    "input_power",
)


@dataclass(frozen=True)
class PhysicalParams:
    """System constants of the optomechanical cavity A and the atomic cavity C.

    Either ``mech_quality`` or ``gamma_m`` must be given; an explicit
    ``gamma_m`` overrides the value implied by the quality factor.  Leaving
    ``cavity_freq`` unset identifies the cavity resonance with the laser
    frequency when evaluating the coupling constant.
    """

    cavity_length: float
    mirror_mass: float
    laser_wavelength: float
    mech_freq: float
    optical_decay_A: float
    detuning_A: float
    input_power: float
    mech_quality: float | None = None
    gamma_m: float | None = None
    optical_decay_C: float = 0.0
    detuning_C: float = 0.0
    atom_detuning: float = 0.0
    atom_decay: float = 0.0
    atom_coupling: float = 0.0
    atom_number: float = 0.0
    cavity_coupling: float = 0.0
    cavity_freq: float | None = None
    freq_convention: str = "angular"

    def __post_init__(self):
        problems = _check_physical(self)
        if problems:
            raise ParameterError(
                "invalid physical parameters: "
                + "; ".join(f"{k}: {v}" for k, v in problems.items()),
                problems,
            )

    @property
    def laser_freq(self) -> float:
        return 2.0 * math.pi * C_LIGHT / self.laser_wavelength

    @property
    def omega_A(self) -> float:
        return self.laser_freq if self.cavity_freq is None else self.cavity_freq

    @property
    def mech_damping(self) -> float:
        if self.gamma_m is not None:
            return self.gamma_m
        return self.mech_freq / self.mech_quality

    def replace(self, **changes) -> "PhysicalParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(
        cls, doc: Mapping[str, Any], freq_convention: str | None = None
    ) -> "PhysicalParams":
        """Build parameters from a configuration mapping.

        Frequency-valued entries are read in the unit implied by
        ``freq_convention`` (argument first, then a ``freq_convention`` key in
        ``doc``, then ``"angular"``).  Every missing or malformed field is
        reported in a single :class:`ParameterError`.
        """
        if not isinstance(doc, Mapping):
            raise ParameterError("parameter document must be a JSON object", {"": "not an object"})
        convention = freq_convention or doc.get("freq_convention") or "angular"
        if convention not in FREQ_CONVENTIONS:
            raise ParameterError(
                f"unknown freq_convention {convention!r}",
                {"freq_convention": f"must be one of {FREQ_CONVENTIONS}"},
            )
        known = {f.name for f in dataclasses.fields(cls)}
        problems: dict[str, str] = {}
        for name in REQUIRED_FIELDS:
            if doc.get(name) is None:
                problems[name] = "missing required field"
        if doc.get("mech_quality") is None and doc.get("gamma_m") is None:
            problems["mech_quality"] = "missing required field (or give gamma_m)"
        for name in doc:
            if name not in known:
                problems[name] = "unknown field"
        values: dict[str, Any] = {}
        for name, raw in doc.items():
            if name not in known or name == "freq_convention" or raw is None:
                continue
            try:
                value = float(raw)
            except (TypeError, ValueError):
                problems[name] = f"not a number: {raw!r}"
                continue
            if convention == "ordinary" and name in FREQ_FIELDS:
                value *= 2.0 * math.pi
            values[name] = value
        if problems:
            raise ParameterError(
                "invalid parameter document: "
                + "; ".join(f"{k}: {v}" for k, v in sorted(problems.items())),
                problems,
            )
        return cls(freq_convention=convention, **values)


def _check_physical(p: PhysicalParams) -> dict[str, str]:
    problems: dict[str, str] = {}
    positive = ("cavity_length", "mirror_mass", "laser_wavelength", "mech_freq", "optical_decay_A")
    non_negative = (
        "optical_decay_C",
        "atom_decay",
        "atom_number",
        "input_power",
    )
    for name in positive + non_negative + (
        "detuning_A",
        "detuning_C",
        "atom_detuning",
        "atom_coupling",
        "cavity_coupling",
    ):
        v = getattr(p, name)
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            problems[name] = "must be a finite number"
        elif name in positive and v <= 0:
            problems[name] = "must be > 0"
        elif name in non_negative and v < 0:
            problems[name] = "must be >= 0"
    if p.freq_convention not in FREQ_CONVENTIONS:
        problems["freq_convention"] = f"must be one of {FREQ_CONVENTIONS}"
    if p.gamma_m is not None:
        if not math.isfinite(p.gamma_m) or p.gamma_m <= 0:
            problems["gamma_m"] = "must be finite and > 0"
    elif p.mech_quality is None:
        problems["mech_quality"] = "give mech_quality or gamma_m"
    elif not math.isfinite(p.mech_quality) or p.mech_quality <= 0:
        problems["mech_quality"] = "must be finite and > 0"
    if p.cavity_freq is not None and (not math.isfinite(p.cavity_freq) or p.cavity_freq <= 0):
        problems["cavity_freq"] = "must be finite and > 0"
    return problems


@dataclass(frozen=True)
class EffectiveCavityResponse:
    """Decay rate and detuning of cavity A dressed by the atomic feedback cavity.

    The bare inputs are kept alongside so that the expanded form of the
    bistability inequality can be evaluated from this object alone.
    """

    A1: float
    A2: float
    k_new: float
    delta_new: float
    kappa_A: float
    delta_A: float
    J: float
    gamma_at: float
    delta_at: float

    @property
    def positive_decay(self) -> bool:
        """False flags a parameter set where feedback drives k_new to <= 0."""
        return self.k_new > 0


@dataclass(frozen=True)
class DimensionlessParams:
    """Rates in units of the mechanical frequency plus the scaled drive.

    ``chi_sq * n`` is the dimensionless mirror shift for ``n`` photons and
    ``drive_sq`` equals ``chi_sq * eps_A**2 / omega_m**2``, the right-hand side
    of the intensity cubic written in that variable.
    """

    omega_m: float
    kappa_A: float
    kappa_C: float
    delta_A: float
    delta_C: float
    delta_at: float
    gamma_at: float
    g_at: float
    J: float
    gamma_m: float
    chi_sq: float
    drive_sq: float
    freq_convention: str

    _RATES = ("kappa_A", "kappa_C", "delta_A", "delta_C", "delta_at", "gamma_at", "g_at", "J", "gamma_m")

    def to_si(self) -> dict[str, float]:
        out = {name: getattr(self, name) * self.omega_m for name in self._RATES}
        out["omega_m"] = self.omega_m
        out["chi"] = math.sqrt(self.chi_sq)
        out["epsilon_A"] = math.sqrt(self.drive_sq / self.chi_sq) * self.omega_m if self.chi_sq > 0 else 0.0
        return out


def scaled_coupling(params: PhysicalParams) -> float:
    """Dimensionless optomechanical coupling ``(omega_A / (omega_m L)) sqrt(hbar / (m omega_m))``."""
    wm = params.mech_freq
    chi = params.omega_A / (wm * params.cavity_length) * math.sqrt(HBAR / (params.mirror_mass * wm))
    if not math.isfinite(chi) or chi <= 0:
        raise ParameterError(f"scaled coupling is not finite and positive: {chi!r}", {"chi": "non-finite"})
    return chi


def drive_amplitude(params: PhysicalParams) -> float:
    """Pump amplitude ``sqrt(2 k_A P_in / (hbar omega_L))`` in s^-1."""
    if params.input_power < 0:
        raise ParameterError("input power must be >= 0", {"input_power": "must be >= 0"})
    eps = math.sqrt(2.0 * params.optical_decay_A * params.input_power / (HBAR * params.laser_freq))
    if not math.isfinite(eps):
        raise ParameterError("drive amplitude is not finite", {"input_power": "non-finite drive"})
    return eps


def power_for_drive(params: PhysicalParams, eps_sq: float) -> float:
    """Inverse of :func:`drive_amplitude`: input power giving ``|eps_A|**2 = eps_sq``."""
    return HBAR * params.laser_freq * eps_sq / (2.0 * params.optical_decay_A)


def effective_response(params: PhysicalParams) -> EffectiveCavityResponse:
    kA, dA = params.optical_decay_A, params.detuning_A
    J = params.cavity_coupling
    g, N = params.atom_coupling, params.atom_number
    kC, dC = params.optical_decay_C, params.detuning_C
    gam, dat = params.atom_decay, params.atom_detuning
    A1 = g * g * N + kC * gam - dC * dat
    A2 = dC * gam + kC * dat
    if J == 0.0:
        k_new, d_new = kA, dA
    else:
        den = A1 * A1 + A2 * A2
        if den == 0.0:
            raise SingularResponseError(
                "A1 = A2 = 0 with nonzero cavity coupling: the atomic cavity cannot absorb the feedback"
            )
        k_new = kA + J * J * (gam * A1 + dat * A2) / den
        d_new = dA + J * J * (dat * A1 - gam * A2) / den
    return EffectiveCavityResponse(
        A1=A1, A2=A2, k_new=k_new, delta_new=d_new,
        kappa_A=kA, delta_A=dA, J=J, gamma_at=gam, delta_at=dat,
    )


def atomic_cavity_steady_state(params: PhysicalParams, a_field: complex) -> tuple[complex, complex]:
    """Mean-field cavity-C amplitude and atomic coherence driven by ``a_field``.

    The coupling carries the factor ``-i J`` of the ``J (c^dag a + a^dag c)``
    interaction, so only the modulus of the returned ``c_S`` is
    convention-independent.
    """
    J = params.cavity_coupling
    if J == 0.0:
        return 0j, 0j
    g2N = params.atom_coupling ** 2 * params.atom_number
    atom_den = complex(params.atom_decay, params.atom_detuning)
    if g2N == 0.0:
        atom_term = 0j
    elif atom_den == 0:
        raise SingularResponseError("atomic denominator gamma_at + i delta_at vanishes")
    else:
        atom_term = g2N / atom_den
    den = complex(params.optical_decay_C, params.detuning_C) + atom_term
    if den == 0:
        raise SingularResponseError("cavity-C response denominator vanishes")
    c_s = -1j * J * a_field / den
    if g2N == 0.0:
        sigma = 0j
    else:
        sigma = -1j * params.atom_coupling * c_s * params.atom_number / atom_den
    if not (cmath.isfinite(c_s) and cmath.isfinite(sigma)):
        raise SingularResponseError("non-finite atomic-cavity steady state")
    return c_s, sigma


def to_dimensionless(params: PhysicalParams) -> DimensionlessParams:
    wm = params.mech_freq
    chi = scaled_coupling(params)
    eps = drive_amplitude(params)
    return DimensionlessParams(
        omega_m=wm,
        kappa_A=params.optical_decay_A / wm,
        kappa_C=params.optical_decay_C / wm,
        delta_A=params.detuning_A / wm,
        delta_C=params.detuning_C / wm,
        delta_at=params.atom_detuning / wm,
        gamma_at=params.atom_decay / wm,
        g_at=params.atom_coupling / wm,
        J=params.cavity_coupling / wm,
        gamma_m=params.mech_damping / wm,
        chi_sq=chi * chi,
        drive_sq=chi * chi * eps * eps / (wm * wm),
        freq_convention=params.freq_convention,
    )


def derived_quantities(params: PhysicalParams) -> dict[str, Any]:
    """Everything the ``derive`` subcommand reports, as plain JSON types."""
    resp = effective_response(params)
    dim = to_dimensionless(params)
    out: dict[str, Any] = {
        "freq_convention": params.freq_convention,
        "laser_freq": params.laser_freq,
        "omega_A": params.omega_A,
        "gamma_m": params.mech_damping,
        "chi": scaled_coupling(params),
        "epsilon_A": drive_amplitude(params),
        "A1": resp.A1,
        "A2": resp.A2,
        "k_new": resp.k_new,
        "delta_new": resp.delta_new,
        "k_new_positive": resp.positive_decay,
        "dimensionless": {
            k: v for k, v in dataclasses.asdict(dim).items() if k != "freq_convention"
        },
    }
    try:
        c_s, sigma = atomic_cavity_steady_state(params, 1.0)
        out["atomic_cavity_unit_drive"] = {
            "c_S": [c_s.real, c_s.imag],
            "sigma12_S": [sigma.real, sigma.imag],
        }
    except SingularResponseError as exc:
        out["atomic_cavity_unit_drive"] = {"error": str(exc)}
    return out
