import numpy as np
import pytest
import scipy.linalg

from hybridopto import _purepy, kernels
from hybridopto.cooling import build_linearized_system
from hybridopto.presets import fig5_params

try:
    from hybridopto import _kernels
except ImportError:  # pragma: no cover - exercised only without a compiler
    _kernels = None

needs_compiled = pytest.mark.skipif(_kernels is None, reason="compiled extension not built")


def test_backend_selection():
    assert kernels.BACKEND in ("compiled", "python")
    assert kernels.get_backend("python") is _purepy
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_forced_pure_python(monkeypatch):
    import importlib

    monkeypatch.setenv("HYBRIDOPTO_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("HYBRIDOPTO_PURE_PYTHON")
        importlib.reload(kernels)


def test_cubic_edge_cases():
    for mod in filter(None, (_purepy, _kernels)):
        roots, counts = mod.cubic_roots([0.1, 0.1, np.nan], [1.0, 1.0, 1.0], [0.0, 0.05, 1.0])
        assert list(counts) == [1, 3, -1]
        assert roots[0, 0] == 0.0 and np.isnan(roots[0, 1])


@needs_compiled
def test_cubic_backends_agree():
    rng = np.random.default_rng(11)
    k = 10 ** rng.uniform(-3, 1, 20000)
    d = rng.uniform(-3, 5, 20000)
    e = 10 ** rng.uniform(-6, 2, 20000)
    r1, c1 = _kernels.cubic_roots(k, d, e)
    r2, c2 = _purepy.cubic_roots(k, d, e)
    assert np.array_equal(c1, c2)
    assert np.allclose(r1, r2, rtol=1e-12, atol=1e-15, equal_nan=True)


def _schur_problem(t_end=50.0):
    s = build_linearized_system(fig5_params())
    T, U = scipy.linalg.schur(s.M, output="complex")
    UH = U.conj().T
    X0 = UH @ np.diag([1, 1e4 + 1, 1, 1, 0, 1e4, 0, 0]).astype(complex) @ U
    return T, UH @ s.D @ U, X0, np.linspace(0, t_end, 6)


@needs_compiled
def test_rodas_backends_agree():
    T, D, X0, t = _schur_problem()
    a = _kernels.rodas4_lyapunov(T, D, X0, t, 0.0, 1e-6, 1e-10, 1e-4, 10**6)
    b = _purepy.rodas4_lyapunov(T, D, X0, t, 0.0, 1e-6, 1e-10, 1e-4, 10**6)
    assert a[1:3] == b[1:3] and a[4] == b[4] == 0
    assert np.allclose(a[0], b[0], rtol=1e-9, atol=1e-9 * np.max(np.abs(a[0])))


def test_rodas_matches_matrix_exponential():
    rng = np.random.default_rng(2)
    n = 4
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) - 3 * np.eye(n)
    Dm = np.eye(n, dtype=complex)
    T, U = scipy.linalg.schur(M, output="complex")
    X0 = np.zeros((n, n), complex)
    t_end = 1.5
    X_ss = scipy.linalg.solve_continuous_lyapunov(T, -U.conj().T @ Dm @ U)
    E = scipy.linalg.expm(T * t_end)
    exact = X_ss + E @ (X0 - X_ss) @ E.conj().T
    for mod in filter(None, (_purepy, _kernels)):
        out, *_ , status, t = mod.rodas4_lyapunov(T, U.conj().T @ Dm @ U, X0, np.array([0.0, t_end]),
                                                  0.0, 1e-10, 1e-14, 1e-3, 10**6)
        assert status == 0 and t == t_end
        assert np.allclose(out[-1], exact, rtol=0, atol=1e-8)


def test_rodas_fourth_order():
    # Fixed steps (huge tolerances) so the global error reflects the method order.
    T = np.array([[-1.0 + 2j, 0.5], [0.0, -0.3 - 1j]])
    D = np.eye(2, dtype=complex)
    X0 = np.eye(2, dtype=complex)
    X_ss = scipy.linalg.solve_continuous_lyapunov(T, -D)
    E = scipy.linalg.expm(T * 2.0)
    exact = X_ss + E @ (X0 - X_ss) @ E.conj().T
    errs = []
    for n in (20, 40, 80):
        t = np.linspace(0, 2.0, n + 1)
        out = _purepy.rodas4_lyapunov(T, D, X0, t, 0.0, 1e10, 1e10, 2.0 / n, 10**6)[0]
        errs.append(max(np.max(np.abs(out[-1] - exact)), 1e-300))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.5)


def test_rodas_fixed_point_is_lyapunov():
    T, D, _, _ = _schur_problem()
    X_ss = scipy.linalg.solve_continuous_lyapunov(T, -D)
    for mod in filter(None, (_purepy, _kernels)):
        out = mod.rodas4_lyapunov(T, D, X_ss, np.array([0.0, 100.0]), 0.0, 1e-6, 1e-10, 1e-2, 10**6)[0]
        assert np.allclose(out[-1], X_ss, rtol=1e-9, atol=1e-9 * np.max(np.abs(X_ss)))
