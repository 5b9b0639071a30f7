"""Linearized four-mode dynamics and the mean phonon number.

The operator vector is ``v = (a, b, c, d, a^dag, b^dag, c^dag, d^dag)`` with
``d`` the bosonized collective atomic coherence.  Fluctuations obey
``dv/dt = M v + noise`` and the covariance ``C = <v v^dag>`` obeys

    dC/dt = M C + C M^dag + D,

so ``C[4 + i, 4 + j] = <o_i^dag o_j>`` holds the normally ordered moments
and ``C[i, 4 + j] = <o_i o_j>`` the anomalous ones.  Rates are in units of
``omega_m`` and times in units of ``1/omega_m``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Iterator, Mapping

import numpy as np
import scipy.linalg

from . import kernels
from .errors import IntegrationError, NoSteadyStateError, ParameterError

MODES = ("a", "b", "c", "d")
DETUNING_CONVENTIONS = ("cavity_minus_laser", "laser_minus_cavity")
DISSIPATOR_CONVENTIONS = ("amplitude", "printed")

_REQUIRED = ("delta", "delta_C", "delta_at", "kappa_A", "kappa_C", "gamma_at", "gamma_m", "g_at", "J", "G", "n_th")


@dataclass(frozen=True)
class LinearizedParams:
    """Parameters of the linearized Hamiltonian and its dissipators.

    ``detuning_convention="laser_minus_cavity"`` flips the sign of the three
    optical/atomic detunings relative to the mechanical frequency.
    ``dissipator_convention="printed"`` halves the amplitude decay of the
    optical and atomic modes (the mechanical mode always decays at
    ``gamma_m / 2``).
    """

    delta: float
    delta_C: float
    delta_at: float
    kappa_A: float
    kappa_C: float
    gamma_at: float
    gamma_m: float
    g_at: float
    J: float
    G: float
    n_th: float
    omega_m: float = 1.0
    detuning_convention: str = "cavity_minus_laser"
    dissipator_convention: str = "amplitude"

    def __post_init__(self):
        bad = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.type == "float" and (not isinstance(v, (int, float)) or not math.isfinite(v)):
                bad[f.name] = "must be a finite number"
        for name in ("kappa_A", "kappa_C", "gamma_at", "gamma_m", "n_th"):
            if name not in bad and getattr(self, name) < 0:
                bad[name] = "must be >= 0"
        if "omega_m" not in bad and self.omega_m <= 0:
            bad["omega_m"] = "must be > 0"
        if self.detuning_convention not in DETUNING_CONVENTIONS:
            bad["detuning_convention"] = f"must be one of {DETUNING_CONVENTIONS}"
        if self.dissipator_convention not in DISSIPATOR_CONVENTIONS:
            bad["dissipator_convention"] = f"must be one of {DISSIPATOR_CONVENTIONS}"
        if bad:
            raise ParameterError(
                "invalid linearized parameters: " + "; ".join(f"{k}: {v}" for k, v in bad.items()), bad
            )

    def replace(self, **changes) -> "LinearizedParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "LinearizedParams":
        if not isinstance(doc, Mapping):
            raise ParameterError("parameter document must be a JSON object", {"": "not an object"})
        known = {f.name for f in dataclasses.fields(cls)}
        problems = {name: "missing required field" for name in _REQUIRED if doc.get(name) is None}
        values: dict[str, Any] = {}
        for name, raw in doc.items():
            if name not in known:
                problems[name] = "unknown field"
            elif name.endswith("_convention"):
                values[name] = raw
            else:
                try:
                    values[name] = float(raw)
                except (TypeError, ValueError):
                    problems[name] = f"not a number: {raw!r}"
        if problems:
            raise ParameterError(
                "invalid parameter document: " + "; ".join(f"{k}: {v}" for k, v in sorted(problems.items())),
                problems,
            )
        return cls(**values)


@dataclass(frozen=True)
class LinearizedSystem:
    M: np.ndarray
    D: np.ndarray
    params: LinearizedParams


@dataclass(frozen=True)
class MomentState:
    t: float
    C: np.ndarray

    @property
    def normal(self) -> np.ndarray:
        """``N[i, j] = <o_i^dag o_j>``."""
        return self.C[4:, 4:]

    @property
    def anomalous(self) -> np.ndarray:
        """``A[i, j] = <o_i o_j>``."""
        return self.C[:4, 4:]

    @property
    def first_moments(self) -> np.ndarray:
        # Fluctuations around the mean field have zero mean at all times.
        return np.zeros(4, dtype=complex)

    def occupancy(self, mode: str) -> float:
        i = MODES.index(mode)
        return float(self.C[4 + i, 4 + i].real)

    @property
    def n_b(self) -> float:
        return self.occupancy("b")

    def moments(self) -> dict[str, complex]:
        """The normally ordered and anomalous pair moments keyed like ``"a+b"`` and ``"ab"``."""
        out = {}
        for i, p in enumerate(MODES):
            for j in range(i, 4):
                q = MODES[j]
                out[f"{p}+{q}"] = complex(self.normal[i, j])
                out[f"{p}{q}"] = complex(self.anomalous[i, j])
        return out

    def hermiticity_error(self) -> float:
        N = self.normal
        return float(np.max(np.abs(N - N.conj().T)))

    @classmethod
    def from_occupancies(cls, n_a=0.0, n_b=0.0, n_c=0.0, n_d=0.0, t=0.0) -> "MomentState":
        """Uncorrelated thermal-like state; every other second moment vanishes."""
        occ = np.array([n_a, n_b, n_c, n_d], dtype=float)
        if np.any(occ < 0) or not np.all(np.isfinite(occ)):
            raise ParameterError("occupancies must be finite and >= 0", {"occupancies": "invalid"})
        return cls(float(t), np.diag(np.concatenate([1.0 + occ, occ])).astype(complex))


@dataclass
class Trajectory:
    times: np.ndarray
    C: np.ndarray  # (samples, 8, 8)
    n_accepted: int
    n_rejected: int
    error_estimate: float
    backend: str

    def __len__(self) -> int:
        return self.times.size

    def __getitem__(self, i) -> MomentState:
        return MomentState(float(self.times[i]), self.C[i])

    def __iter__(self) -> Iterator[MomentState]:
        for i in range(len(self)):
            yield self[i]

    def occupancy(self, mode: str) -> np.ndarray:
        i = 4 + MODES.index(mode)
        return self.C[:, i, i].real.copy()

    @property
    def n_b(self) -> np.ndarray:
        return self.occupancy("b")

    def hermiticity_drift(self) -> float:
        N = self.C[:, 4:, 4:]
        return float(np.max(np.abs(N - np.conj(np.swapaxes(N, 1, 2)))))

    def min_occupancy(self) -> float:
        return float(min(self.occupancy(m).min() for m in MODES))


def build_linearized_system(p: LinearizedParams) -> LinearizedSystem:
    """Drift and diffusion matrices for the operator vector ``(a, b, c, d, h.c.)``."""
    s = 1.0 if p.detuning_convention == "cavity_minus_laser" else -1.0
    r = 1.0 if p.dissipator_convention == "amplitude" else 0.5
    kA, kC, ga = r * p.kappa_A, r * p.kappa_C, r * p.gamma_at
    A = np.zeros((4, 4), dtype=complex)
    B = np.zeros((4, 4), dtype=complex)
    A[0, 0] = -(kA + 1j * s * p.delta)
    A[0, 1] = B[0, 1] = 1j * p.G
    A[0, 2] = -1j * p.J
    A[1, 1] = -(0.5 * p.gamma_m + 1j * p.omega_m)
    A[1, 0] = B[1, 0] = 1j * p.G
    A[2, 2] = -(kC + 1j * s * p.delta_C)
    A[2, 0] = -1j * p.J
    A[2, 3] = -1j * p.g_at
    A[3, 3] = -(ga + 1j * s * p.delta_at)
    A[3, 2] = -1j * p.g_at
    M = np.block([[A, B], [B.conj(), A.conj()]])
    D = np.diag(
        [2 * kA, p.gamma_m * (p.n_th + 1.0), 2 * kC, 2 * ga, 0.0, p.gamma_m * p.n_th, 0.0, 0.0]
    ).astype(complex)
    return LinearizedSystem(M, D, p)


def stability_spectrum(sys: LinearizedSystem) -> np.ndarray:
    ev = np.linalg.eigvals(sys.M)
    return ev[np.lexsort((ev.imag, -ev.real))]


def spectral_abscissa(sys: LinearizedSystem) -> float:
    return float(np.max(np.linalg.eigvals(sys.M).real))


def relaxation_time(sys: LinearizedSystem) -> float:
    """``1/gamma_eff`` with ``gamma_eff = -2 * abscissa``, the slowest decay rate of the second moments."""
    a = spectral_abscissa(sys)
    return math.inf if a >= 0 else 1.0 / (-2.0 * a)


def steady_state_moments(sys: LinearizedSystem) -> MomentState:
    """Solution of ``M C + C M^dag + D = 0`` for a stable drift matrix."""
    ev = stability_spectrum(sys)
    if ev[0].real >= 0:
        raise NoSteadyStateError(
            f"drift matrix is not stable (max Re lambda = {ev[0].real:.6g})", ev[ev.real >= 0]
        )
    C = scipy.linalg.solve_continuous_lyapunov(sys.M, -sys.D)
    return MomentState(math.inf, C)


def evolve_moments(
    sys: LinearizedSystem,
    init: MomentState,
    t_final: float,
    dt_control: float | None = None,
    *,
    samples: int | None = None,
    times=None,
    rtol: float = 1e-6,
    atol: float = 1e-10,
    max_steps: int = 50_000_000,
    backend: str | None = None,
) -> Trajectory:
    """Integrate the covariance equation from ``init`` to ``t_final``.

    Output times come from ``times`` if given, else ``samples`` evenly spaced
    points, else a spacing of ``dt_control``, else just the two endpoints.
    The integrator is an adaptive, L-stable Rodas4 scheme run in the Schur
    basis of ``M`` so that each stage is a triangular Sylvester solve.
    """
    t0 = init.t
    if not math.isfinite(t_final) or t_final < t0:
        raise ParameterError("t_final must be finite and >= initial time", {"t_final": "invalid"})
    if times is not None:
        t_out = np.asarray(times, dtype=float)
    elif samples is not None:
        if samples < 2:
            raise ParameterError("need at least 2 samples", {"samples": "must be >= 2"})
        t_out = np.linspace(t0, t_final, samples)
    elif dt_control is not None:
        if dt_control <= 0:
            raise ParameterError("dt_control must be > 0", {"dt_control": "must be > 0"})
        t_out = np.arange(t0, t_final, dt_control)
        t_out = np.append(t_out, t_final) if t_out[-1] < t_final else t_out
    else:
        t_out = np.array([t0, t_final])
    if np.any(np.diff(t_out) < 0) or t_out[0] < t0:
        raise ParameterError("output times must be ascending and >= initial time", {"times": "invalid"})
    if init.hermiticity_error() > 1e-9:
        raise ParameterError("initial moments are not Hermitian", {"init": "not Hermitian"})

    T, U = scipy.linalg.schur(sys.M, output="complex")
    UH = U.conj().T
    X0 = UH @ init.C @ U
    Dt = UH @ sys.D @ U
    scale = max(1.0, float(np.max(np.abs(np.diag(T)))))
    h0 = min(1e-2 / scale, max(t_final - t0, 1e-300))
    mod = kernels.get_backend(backend)
    out, n_acc, n_rej, err, status, t_reached = mod.rodas4_lyapunov(
        T, Dt, X0, t_out, float(t0), float(rtol), float(atol), float(h0), int(max_steps)
    )
    if status != 0:
        reason = {1: "step size underflow", 2: "non-finite state", 3: "maximum step count exceeded"}[status]
        raise IntegrationError(f"moment integration failed: {reason}", t_reached)
    C = U[None] @ out @ UH[None]
    C[t_out <= t0] = init.C
    name = "python" if mod is kernels.get_backend("python") else "compiled"
    return Trajectory(t_out, C, int(n_acc), int(n_rej), float(err), name)
