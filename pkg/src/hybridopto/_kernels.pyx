# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: batched intensity-cubic roots and the Rodas4 moment stepper.

Both functions mirror ``_purepy`` exactly in algorithm; the Python module is
the fallback used when this extension is not built.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, acos, cbrt, fabs, isfinite, NAN

cnp.import_array()

cdef double TWO_PI_3 = 2.0943951023931957  # 2*pi/3

# Rodas4 in the transformed (Kaps-Rentrop) form.
cdef double ROS_GAMMA = 0.25
cdef double[15] ROS_A = [
    1.544, 0.9466785280815826, 0.2557011698983284, 3.314825187068521,
    2.896124015972201, 0.9986419139977817, 1.221224509226641, 6.019134481288629,
    12.53708332932087, -0.6878860361058950, 1.221224509226641, 6.019134481288629,
    12.53708332932087, -0.6878860361058950, 1.0]
cdef double[15] ROS_C = [
    -5.6688, -2.430093356833875, -0.2063599157091915, -0.1073529058151375,
    -9.594562251023355, -20.47028614809616, 7.496443313967647, -10.24680431464352,
    -33.99990352819905, 11.70890893206160, 8.083246795921522, -7.981132988064893,
    -31.52159432874371, 16.31930543123136, -6.058818238834054]
cdef double[6] ROS_M = [
    1.221224509226641, 6.019134481288629, 12.53708332932087, -0.6878860361058950, 1.0, 1.0]


cdef inline double _g(double y, double k, double d, double e) noexcept nogil:
    cdef double u = d - y
    return y * (u * u + k * k) - e


cdef inline double _dg(double y, double k, double d) noexcept nogil:
    return k * k + (d - y) * (d - 3.0 * y)


cdef inline double _polish(double y, double k, double d, double e) noexcept nogil:
    # Two guarded Newton steps; a step is kept only if it shrinks |g|.
    cdef int it
    cdef double gy, dgy, y1, g1
    for it in range(2):
        gy = _g(y, k, d, e)
        dgy = _dg(y, k, d)
        if gy == 0.0 or dgy == 0.0:
            break
        y1 = y - gy / dgy
        g1 = _g(y1, k, d, e)
        if fabs(g1) <= fabs(gy):
            y = y1
    return y


cdef int _roots_one(double k, double d, double e, double* out) noexcept nogil:
    cdef double p = k * k - d * d / 3.0
    cdef double q = 2.0 * d * k * k / 3.0 + 2.0 * d * d * d / 27.0 - e
    cdef double shift = 2.0 * d / 3.0
    cdef double disc = -(4.0 * p * p * p + 27.0 * q * q)
    cdef double r, arg, phi, s, u, t, tmp
    cdef double cand[3]
    cdef int n = 0, m = 0, i, j
    if not (isfinite(p) and isfinite(q)):
        return -1
    if e == 0.0:
        out[0] = 0.0
        return 1
    if p < 0.0 and disc > 0.0:
        r = 2.0 * sqrt(-p / 3.0)
        arg = 3.0 * q / (2.0 * p) * sqrt(-3.0 / p)
        if arg > 1.0:
            arg = 1.0
        elif arg < -1.0:
            arg = -1.0
        phi = acos(arg) / 3.0
        for i in range(3):
            cand[i] = r * cos(phi - TWO_PI_3 * i) + shift
        n = 3
    else:
        s = sqrt(q * q / 4.0 + p * p * p / 27.0) if disc <= 0.0 else 0.0
        if q >= 0.0:
            u = cbrt(-q / 2.0 - s)
        else:
            u = cbrt(-q / 2.0 + s)
        if u == 0.0:
            t = 0.0
        else:
            t = u - p / (3.0 * u)
        cand[0] = t + shift
        n = 1
    for i in range(n):
        cand[i] = _polish(cand[i], k, d, e)
    # sort ascending
    for i in range(1, n):
        tmp = cand[i]
        j = i - 1
        while j >= 0 and cand[j] > tmp:
            cand[j + 1] = cand[j]
            j -= 1
        cand[j + 1] = tmp
    for i in range(n):
        if cand[i] < 0.0:
            continue
        if m > 0 and fabs(cand[i] - out[m - 1]) <= 1e-7 * fabs(cand[i]):
            continue
        out[m] = cand[i]
        m += 1
    return m


def cubic_roots(k, d, e):
    """Non-negative real roots of ``y*(k**2 + (d - y)**2) = e`` for each element.

    Returns ``(roots, counts)`` with ``roots`` of shape ``(N, 3)`` sorted
    ascending and NaN-padded; a count of ``-1`` marks non-finite coefficients.
    """
    kk, dd, ee = np.broadcast_arrays(
        np.asarray(k, dtype=np.float64), np.asarray(d, dtype=np.float64), np.asarray(e, dtype=np.float64))
    cdef const double[::1] kv = np.ascontiguousarray(kk.ravel())
    cdef const double[::1] dv = np.ascontiguousarray(dd.ravel())
    cdef const double[::1] ev = np.ascontiguousarray(ee.ravel())
    cdef Py_ssize_t n = kv.shape[0], i, j
    roots = np.full((n, 3), np.nan)
    counts = np.zeros(n, dtype=np.int64)
    cdef double[:, ::1] rv = roots
    cdef cnp.int64_t[::1] cv = counts
    cdef double buf[3]
    cdef int m
    with nogil:
        for i in range(n):
            m = _roots_one(kv[i], dv[i], ev[i], buf)
            cv[i] = m
            for j in range(m):
                rv[i, j] = buf[j]
    return roots, counts


cdef inline double _fro(const double complex* X, Py_ssize_t nn) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(nn):
        s += X[i].real * X[i].real + X[i].imag * X[i].imag
    return sqrt(s)


cdef void _rhs(const double complex* T, const double complex* TH, const double complex* D,
               const double complex* Y, double complex* F, Py_ssize_t n) noexcept nogil:
    # F = T Y + Y T^H + D with T upper triangular; TH holds conj(T) transposed.
    cdef Py_ssize_t a, b, c
    cdef double complex s
    for a in range(n):
        for b in range(n):
            s = D[a * n + b]
            for c in range(a, n):
                s = s + T[a * n + c] * Y[c * n + b]
            for c in range(b, n):
                s = s + Y[a * n + c] * TH[c * n + b]
            F[a * n + b] = s


cdef void _sylvester(const double complex* T, const double complex* TH, const double complex* inv_den,
                     const double complex* R, double complex* K, Py_ssize_t n) noexcept nogil:
    # Solve (sigma/2 - T) K + K (sigma/2 - T)^H = R by back substitution;
    # inv_den[a, b] = 1 / (sigma - T[a, a] - conj(T[b, b])).
    cdef Py_ssize_t a, b, c
    cdef double complex s
    a = n - 1
    while a >= 0:
        b = n - 1
        while b >= 0:
            s = R[a * n + b]
            for c in range(a + 1, n):
                s = s + T[a * n + c] * K[c * n + b]
            for c in range(b + 1, n):
                s = s + K[a * n + c] * TH[c * n + b]
            K[a * n + b] = s * inv_den[a * n + b]
            b -= 1
        a -= 1


def rodas4_lyapunov(T, D, X0, t_out, double t0, double rtol, double atol,
                    double h0, long max_steps):
    """Integrate ``dX/dt = T X + X T^H + D`` with adaptive Rodas4 steps.

    ``T`` must be upper triangular (a complex Schur factor).  States are
    recorded at each time in ``t_out`` (ascending, >= ``t0``).  Returns
    ``(samples, n_accepted, n_rejected, error_sum, status, t_reached)`` where
    status is 0 on success, 1 on step-size underflow, 2 on a non-finite
    state and 3 when ``max_steps`` is exhausted.
    """
    T_arr = np.ascontiguousarray(T, dtype=np.complex128)
    TH_arr = np.ascontiguousarray(T_arr.conj().T)
    D_arr = np.ascontiguousarray(D, dtype=np.complex128)
    cdef double[::1] tv = np.ascontiguousarray(t_out, dtype=np.float64)
    cdef Py_ssize_t n = T_arr.shape[0], nn = n * n, n_out = tv.shape[0]
    samples = np.zeros((n_out, n, n), dtype=np.complex128)
    X_arr = np.array(X0, dtype=np.complex128, order="C")
    work = np.zeros((10, n, n), dtype=np.complex128)
    cdef double complex[:, ::1] Tv = T_arr
    cdef double complex[:, ::1] THv = TH_arr
    cdef double complex[:, ::1] Dv = D_arr
    cdef double complex[:, :, ::1] Sv = samples
    cdef double complex[:, ::1] Xv = X_arr
    cdef double complex[:, :, ::1] Wv = work
    cdef double complex* Tp = &Tv[0, 0]
    cdef double complex* THp = &THv[0, 0]
    cdef double complex* Dp = &Dv[0, 0]
    cdef double complex* X = &Xv[0, 0]
    cdef double complex* Sp = &Sv[0, 0, 0] if n_out > 0 else NULL
    cdef double complex* K = &Wv[0, 0, 0]          # six stage slots
    cdef double complex* Xn = &Wv[6, 0, 0]
    cdef double complex* Y = &Wv[7, 0, 0]
    cdef double complex* F = &Wv[8, 0, 0]
    cdef double complex* inv_den = &Wv[9, 0, 0]
    cdef double t = t0, h = h0, hs, sigma, err, scale, fac, err_sum = 0.0
    cdef double x_norm, xn_norm, coef
    cdef long n_acc = 0, n_rej = 0
    cdef int status = 0, stage, j, idx
    cdef Py_ssize_t k_out = 0, a, b, i
    cdef bint finite

    with nogil:
        while k_out < n_out and tv[k_out] <= t0:
            for i in range(nn):
                Sp[k_out * nn + i] = X[i]
            k_out += 1
        while k_out < n_out:
            if n_acc + n_rej >= max_steps:
                status = 3
                break
            hs = h
            if t + hs >= tv[k_out] or tv[k_out] - (t + hs) < 1e-12 * fabs(tv[k_out]):
                hs = tv[k_out] - t
            if hs < 1e-14 * (fabs(t) + 1.0):
                status = 1
                break
            sigma = 1.0 / (hs * ROS_GAMMA)
            for a in range(n):
                for b in range(n):
                    inv_den[a * n + b] = 1.0 / (sigma - Tp[a * n + a] - THp[b * n + b])
            for stage in range(6):
                idx = stage * (stage - 1) // 2
                for i in range(nn):
                    Y[i] = X[i]
                for j in range(stage):
                    coef = ROS_A[idx + j]
                    for i in range(nn):
                        Y[i] = Y[i] + coef * K[j * nn + i]
                _rhs(Tp, THp, Dp, Y, F, n)
                for j in range(stage):
                    coef = ROS_C[idx + j] / hs
                    for i in range(nn):
                        F[i] = F[i] + coef * K[j * nn + i]
                _sylvester(Tp, THp, inv_den, F, K + stage * nn, n)
            finite = True
            for i in range(nn):
                Xn[i] = X[i]
            for j in range(6):
                coef = ROS_M[j]
                for i in range(nn):
                    Xn[i] = Xn[i] + coef * K[j * nn + i]
            for i in range(nn):
                if not (isfinite(Xn[i].real) and isfinite(Xn[i].imag)):
                    finite = False
            x_norm = _fro(X, nn)
            xn_norm = _fro(Xn, nn)
            scale = atol + rtol * (x_norm if x_norm > xn_norm else xn_norm)
            err = _fro(K + 5 * nn, nn) / scale
            if not finite or not isfinite(err) or not isfinite(scale):
                n_rej += 1
                h = 0.2 * hs
                if h < 1e-14 * (fabs(t) + 1.0):
                    status = 2
                    break
                continue
            if err <= 1.0:
                t = t + hs
                if fabs(t - tv[k_out]) <= 1e-12 * (fabs(tv[k_out]) + 1.0):
                    t = tv[k_out]
                for i in range(nn):
                    X[i] = Xn[i]
                n_acc += 1
                err_sum += err * scale
                while k_out < n_out and tv[k_out] <= t:
                    for i in range(nn):
                        Sp[k_out * nn + i] = X[i]
                    k_out += 1
            else:
                n_rej += 1
            if err == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * err ** -0.25
                if fac > 5.0:
                    fac = 5.0
                elif fac < 0.2:
                    fac = 0.2
            # Keep the unclipped proposal when this step was shortened to hit an output time.
            if hs < h and err <= 1.0:
                if hs * fac > h:
                    h = hs * fac
            else:
                h = hs * fac
    return samples, n_acc, n_rej, err_sum, status, t
