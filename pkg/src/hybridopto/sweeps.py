"""Figure-style parameter sweeps: detuning S-curves, power hysteresis and threshold maps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bistability import (
    STABLE,
    UNSTABLE,
    roots_batch,
    threshold_power,
    turning_points,
)
from .errors import NoThresholdError, ParameterError
from .params import HBAR, PhysicalParams, effective_response, scaled_coupling

DEFAULT_POINTS = 2000
JUMP_RTOL = 1e-4


@dataclass(frozen=True)
class SweepSample:
    control_value: float
    roots: tuple[tuple[float, str], ...]
    followed_n: float | None = None

    @property
    def photon_numbers(self) -> list[float]:
        return [n for n, _ in self.roots]


@dataclass(frozen=True)
class JumpEvent:
    control_value: float
    from_n: float
    to_n: float


@dataclass
class SweepTrace:
    control_name: str
    samples: list[SweepSample]
    direction: str | None = None
    jump_events: list[JumpEvent] = field(default_factory=list)
    chi: float = 0.0
    label: str = ""

    @property
    def control_values(self) -> np.ndarray:
        return np.array([s.control_value for s in self.samples])

    @property
    def followed(self) -> np.ndarray:
        return np.array([np.nan if s.followed_n is None else s.followed_n for s in self.samples])

    @property
    def root_counts(self) -> np.ndarray:
        return np.array([len(s.roots) for s in self.samples])

    def chi_q(self, n):
        """Mirror shift ``chi * Q_S = chi**2 * n`` plotted on the figures."""
        return self.chi * self.chi * np.asarray(n, dtype=float)

    def multivalued_interval(self) -> tuple[float, float] | None:
        """Smallest and largest control value at which three roots coexist."""
        vals = self.control_values[self.root_counts == 3]
        if vals.size == 0:
            return None
        return float(vals.min()), float(vals.max())


@dataclass
class ThresholdMap:
    delta_at_over_gamma: np.ndarray
    kC_over_omega_m: np.ndarray
    P_th: np.ndarray  # shape (len(delta_at), len(kC)); NaN where not bistable

    def bistable_mask(self) -> np.ndarray:
        return np.isfinite(self.P_th)


def _grid(lo: float, hi: float, n_points: int, name: str) -> np.ndarray:
    if n_points < 2:
        raise ParameterError(f"{name}: need at least 2 points", {"n_points": "must be >= 2"})
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo == hi:
        raise ParameterError(f"{name}: empty or non-finite range ({lo!r}, {hi!r})", {"range": "empty"})
    return np.linspace(lo, hi, n_points)


def _scaled_drive(params: PhysicalParams, chi: float, powers) -> np.ndarray:
    eps_sq = 2.0 * params.optical_decay_A * np.asarray(powers, dtype=float) / (HBAR * params.laser_freq)
    return chi * chi * eps_sq / params.mech_freq ** 2


def _samples(control, y, stable, counts, chi, followed=None) -> list[SweepSample]:
    out = []
    for i, c in enumerate(control):
        m = counts[i]
        roots = tuple(
            (float(y[i, j]) / (chi * chi), STABLE if stable[i, j] else UNSTABLE) for j in range(m)
        )
        f = None if followed is None else followed[i]
        out.append(SweepSample(float(c), roots, f))
    return out


def detuning_sweep(params: PhysicalParams, delta_A_range, n_points: int = DEFAULT_POINTS) -> SweepTrace:
    """All steady states versus the cavity-A detuning (rad/s) at fixed drive power.

    Every real root is reported; no branch is followed.
    """
    lo, hi = delta_A_range
    grid = _grid(float(lo), float(hi), n_points, "detuning sweep")
    resp = effective_response(params)
    chi = scaled_coupling(params)
    wm = params.mech_freq
    shift = resp.delta_new - resp.delta_A
    if resp.k_new <= 0:
        raise ParameterError("k_new must be > 0", {"k_new": "non-positive"})
    if chi == 0.0:
        raise ParameterError("chi must be > 0 for a sweep", {"chi": "zero"})
    e = _scaled_drive(params, chi, params.input_power)
    y, stable, counts = roots_batch(resp.k_new / wm, (grid + shift) / wm, e)
    if np.any(counts < 0):
        raise ParameterError("non-finite cubic coefficients in sweep", {"cubic": "non-finite"})
    return SweepTrace("detuning_A", _samples(grid, y, stable, counts, chi), chi=chi)


def _branch_labels(y_row, count, y_minus, y_plus):
    if y_minus is None:
        return ["single"] * count
    labels = []
    for j in range(count):
        if y_row[j] < y_minus:
            labels.append("lower")
        elif y_row[j] > y_plus:
            labels.append("upper")
        else:
            labels.append("middle")
    return labels


def _log(y):
    return math.log(max(y, 1e-300))


def power_sweep(
    params: PhysicalParams,
    P_range,
    n_points: int = DEFAULT_POINTS,
    direction: str = "up",
    jump_rtol: float = JUMP_RTOL,
) -> SweepTrace:
    """Quasi-static hysteresis sweep of the input power (W).

    The followed branch starts on the lowest root (``up``) or the highest
    (``down``).  When the branch being followed ends at a fold, the sweep
    jumps to the remaining stable root and the fold power is refined by
    bisection to ``jump_rtol``.
    """
    if direction not in ("up", "down"):
        raise ParameterError(f"direction must be 'up' or 'down', got {direction!r}", {"direction": "invalid"})
    lo, hi = sorted(float(v) for v in P_range)
    if lo < 0:
        raise ParameterError("power range must be non-negative", {"P_range": "negative"})
    grid = _grid(lo, hi, n_points, "power sweep")
    if direction == "down":
        grid = grid[::-1]
    resp = effective_response(params)
    chi = scaled_coupling(params)
    wm = params.mech_freq
    if resp.k_new <= 0:
        raise ParameterError("k_new must be > 0", {"k_new": "non-positive"})
    if chi == 0.0:
        raise ParameterError("chi must be > 0 for a sweep", {"chi": "zero"})
    kt, dt = resp.k_new / wm, resp.delta_new / wm
    tp = turning_points(resp, chi, wm)
    y_minus = y_plus = None
    if tp.exists:
        y_minus, y_plus = tp.n_minus * chi * chi, tp.n_plus * chi * chi

    def solve(powers):
        return roots_batch(kt, dt, _scaled_drive(params, chi, powers))

    y, stable, counts = solve(grid)
    followed_y = np.empty(grid.size)
    jumps: list[JumpEvent] = []
    j0 = 0 if direction == "up" else counts[0] - 1
    current = y[0, j0]
    label = _branch_labels(y[0], counts[0], y_minus, y_plus)[j0]
    followed_y[0] = current
    for i in range(1, grid.size):
        labels = _branch_labels(y[i], counts[i], y_minus, y_plus)
        same = [j for j in range(counts[i]) if stable[i, j] and labels[j] == label]
        if same:
            j = min(same, key=lambda j: abs(_log(y[i, j]) - _log(current)))
        else:
            cands = [j for j in range(counts[i]) if stable[i, j]]
            j = min(cands, key=lambda j: abs(_log(y[i, j]) - _log(current)))
            p_fold, y_from, y_to = _refine_jump(
                solve, grid[i - 1], grid[i], label, labels[j], y_minus, y_plus, jump_rtol
            )
            jumps.append(JumpEvent(p_fold, y_from / (chi * chi), y_to / (chi * chi)))
            label = labels[j]
        current = y[i, j]
        followed_y[i] = current
    followed = [float(v) / (chi * chi) for v in followed_y]
    trace = SweepTrace("power", _samples(grid, y, stable, counts, chi, followed), direction, jumps, chi=chi)
    return trace


def _refine_jump(solve, p_have, p_lost, old_label, new_label, y_minus, y_plus, rtol):
    """Bisect between the last power where ``old_label`` exists and the first where it does not."""

    def probe(p):
        y, stable, counts = solve(np.array([p]))
        labels = _branch_labels(y[0], counts[0], y_minus, y_plus)
        old = [y[0, j] for j in range(counts[0]) if labels[j] == old_label and stable[0, j]]
        new = [y[0, j] for j in range(counts[0]) if labels[j] == new_label and stable[0, j]]
        return (old[0] if old else None), (new[0] if new else None)

    y_old, _ = probe(p_have)
    _, y_new = probe(p_lost)
    a, b = p_have, p_lost
    while abs(b - a) > rtol * max(abs(a), abs(b)):
        mid = 0.5 * (a + b)
        old, new = probe(mid)
        if old is not None:
            a, y_old = mid, old
        else:
            b = mid
            if new is not None:
                y_new = new
    return 0.5 * (a + b), float(y_old), float(y_new)


def _map_cell(args):
    params, dat, kc = args
    p = params.replace(atom_detuning=dat * params.atom_decay, optical_decay_C=kc * params.mech_freq)
    try:
        return threshold_power(p).P_th
    except NoThresholdError:
        return math.nan


def threshold_map(params: PhysicalParams, delta_at_axis, kC_axis, workers: int | None = None) -> ThresholdMap:
    """Threshold power over a grid of ``delta_at / gamma_at`` and ``k_C / omega_m``.

    Cells are independent; with ``workers > 1`` they are evaluated on a
    thread pool and reassembled in input order.
    """
    dats = np.asarray(delta_at_axis, dtype=float).ravel()
    kcs = np.asarray(kC_axis, dtype=float).ravel()
    if dats.size == 0 or kcs.size == 0:
        raise ParameterError("threshold map axes must be non-empty", {"axes": "empty"})
    cells = [(params, d, k) for d in dats for k in kcs]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_map_cell, cells))
    else:
        values = [_map_cell(c) for c in cells]
    return ThresholdMap(dats, kcs, np.array(values).reshape(dats.size, kcs.size))

