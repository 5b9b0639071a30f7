"""Pure numpy implementations of the kernels in ``_kernels.pyx``.

Same algorithms and the same return conventions; used when the compiled
extension is unavailable or ``HYBRIDOPTO_PURE_PYTHON`` is set.
"""

import math

import numpy as np
from scipy.linalg.lapack import ztrsyl

ROS_GAMMA = 0.25
ROS_A = (
    1.544, 0.9466785280815826, 0.2557011698983284, 3.314825187068521,
    2.896124015972201, 0.9986419139977817, 1.221224509226641, 6.019134481288629,
    12.53708332932087, -0.6878860361058950, 1.221224509226641, 6.019134481288629,
    12.53708332932087, -0.6878860361058950, 1.0,
)
ROS_C = (
    -5.6688, -2.430093356833875, -0.2063599157091915, -0.1073529058151375,
    -9.594562251023355, -20.47028614809616, 7.496443313967647, -10.24680431464352,
    -33.99990352819905, 11.70890893206160, 8.083246795921522, -7.981132988064893,
    -31.52159432874371, 16.31930543123136, -6.058818238834054,
)
ROS_M = (1.221224509226641, 6.019134481288629, 12.53708332932087, -0.6878860361058950, 1.0, 1.0)


def _polish(y, k, d, e):
    for _ in range(2):
        u = d - y
        g = y * (u * u + k * k) - e
        dg = k * k + (d - y) * (d - 3.0 * y)
        ok = (g != 0.0) & (dg != 0.0)
        y1 = np.where(ok, y - np.divide(g, dg, out=np.zeros_like(g), where=ok), y)
        u1 = d - y1
        g1 = y1 * (u1 * u1 + k * k) - e
        y = np.where(np.abs(g1) <= np.abs(g), y1, y)
    return y


def cubic_roots(k, d, e):
    """Non-negative real roots of ``y*(k**2 + (d - y)**2) = e``; see the compiled twin."""
    k, d, e = (np.ravel(a).astype(np.float64) for a in np.broadcast_arrays(
        np.asarray(k, dtype=np.float64), np.asarray(d, dtype=np.float64), np.asarray(e, dtype=np.float64)))
    n = k.size
    p = k * k - d * d / 3.0
    q = 2.0 * d * k * k / 3.0 + 2.0 * d ** 3 / 27.0 - e
    shift = 2.0 * d / 3.0
    disc = -(4.0 * p ** 3 + 27.0 * q * q)
    bad = ~(np.isfinite(p) & np.isfinite(q))
    three = (p < 0.0) & (disc > 0.0) & ~bad

    cand = np.full((n, 3), np.nan)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = 2.0 * np.sqrt(-p / 3.0)
        arg = np.clip(3.0 * q / (2.0 * p) * np.sqrt(-3.0 / p), -1.0, 1.0)
        phi = np.arccos(arg) / 3.0
        for i in range(3):
            cand[three, i] = (r * np.cos(phi - 2.0 * math.pi / 3.0 * i) + shift)[three]
        one = ~three & ~bad
        s = np.where(disc <= 0.0, np.sqrt(np.maximum(q * q / 4.0 + p ** 3 / 27.0, 0.0)), 0.0)
        u = np.where(q >= 0.0, np.cbrt(-q / 2.0 - s), np.cbrt(-q / 2.0 + s))
        t = np.where(u == 0.0, 0.0, u - p / (3.0 * u))
        cand[one, 0] = (t + shift)[one]
        for i in range(3):
            col = cand[:, i]
            live = np.isfinite(col)
            col[live] = _polish(col[live], k[live], d[live], e[live])
    cand.sort(axis=1)

    roots = np.full((n, 3), np.nan)
    counts = np.zeros(n, dtype=np.int64)
    for row in range(n):
        if bad[row]:
            counts[row] = -1
            continue
        if e[row] == 0.0:
            roots[row, 0] = 0.0
            counts[row] = 1
            continue
        m = 0
        for y in cand[row]:
            if not y >= 0.0:
                continue
            if m and abs(y - roots[row, m - 1]) <= 1e-7 * abs(y):
                continue
            roots[row, m] = y
            m += 1
        counts[row] = m
    return roots, counts


def rodas4_lyapunov(T, D, X0, t_out, t0, rtol, atol, h0, max_steps):
    """Integrate ``dX/dt = T X + X T^H + D`` with adaptive Rodas4 steps; see the compiled twin."""
    T = np.ascontiguousarray(T, dtype=np.complex128)
    D = np.ascontiguousarray(D, dtype=np.complex128)
    t_out = np.asarray(t_out, dtype=np.float64)
    n = T.shape[0]
    eye = np.eye(n)
    TH = T.conj().T
    X = np.array(X0, dtype=np.complex128)
    samples = np.zeros((t_out.size, n, n), dtype=np.complex128)
    t, h = float(t0), float(h0)
    n_acc = n_rej = 0
    err_sum = 0.0
    status = 0
    k_out = 0
    while k_out < t_out.size and t_out[k_out] <= t0:
        samples[k_out] = X
        k_out += 1
    K = [None] * 6
    while k_out < t_out.size:
        if n_acc + n_rej >= max_steps:
            status = 3
            break
        target = t_out[k_out]
        hs = h
        if t + hs >= target or target - (t + hs) < 1e-12 * abs(target):
            hs = target - t
        if hs < 1e-14 * (abs(t) + 1.0):
            status = 1
            break
        sigma = 1.0 / (hs * ROS_GAMMA)
        A = 0.5 * sigma * eye - T
        for stage in range(6):
            idx = stage * (stage - 1) // 2
            Y = X.copy()
            for j in range(stage):
                Y += ROS_A[idx + j] * K[j]
            F = T @ Y + Y @ TH + D
            for j in range(stage):
                F += (ROS_C[idx + j] / hs) * K[j]
            sol, scale_, _info = ztrsyl(A, A, F, tranb="C")
            K[stage] = sol / scale_
        Xn = X + sum(m * k for m, k in zip(ROS_M, K))
        finite = bool(np.all(np.isfinite(Xn)))
        scale = atol + rtol * max(np.linalg.norm(X), np.linalg.norm(Xn) if finite else 0.0)
        err = np.linalg.norm(K[5]) / scale
        if not finite or not math.isfinite(err) or not math.isfinite(scale):
            n_rej += 1
            h = 0.2 * hs
            if h < 1e-14 * (abs(t) + 1.0):
                status = 2
                break
            continue
        if err <= 1.0:
            t += hs
            if abs(t - target) <= 1e-12 * (abs(target) + 1.0):
                t = float(target)
            X = Xn
            n_acc += 1
            err_sum += err * scale
            while k_out < t_out.size and t_out[k_out] <= t:
                samples[k_out] = X
                k_out += 1
        else:
            n_rej += 1
        fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.25))
        if hs < h and err <= 1.0:
            h = max(h, hs * fac)
        else:
            h = hs * fac
    return samples, n_acc, n_rej, err_sum, status, float(t)
