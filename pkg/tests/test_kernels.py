"""The compiled and pure-Python kernel backends must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from nlforecast import _kernels
from nlforecast.solar import AirProperties, PvArraySpec, pack_params

PY = _kernels.python_backend
C = _kernels.compiled_backend
needs_compiled = pytest.mark.skipif(C is None, reason="compiled kernels not built")
P = pack_params(PvArraySpec(), AirProperties())


def _gate_inputs(B=7, H=5, seed=0, scale=3.0):
    rng = np.random.default_rng(seed)
    return rng.normal(0, scale, (B, 4 * H)), rng.normal(0, 1, (B, H))


def test_python_forward_reference():
    z, c_prev = _gate_inputs()
    act, c, tanh_c, h = PY.lstm_gates_forward(z, c_prev)
    H = c_prev.shape[1]
    sig = 1 / (1 + np.exp(-z))
    i, f, g, o = sig[:, :H], sig[:, H:2 * H], np.tanh(z[:, 2 * H:3 * H]), sig[:, 3 * H:]
    np.testing.assert_allclose(c, f * c_prev + i * g, rtol=1e-15, atol=1e-15)
    np.testing.assert_allclose(h, o * np.tanh(c), rtol=1e-15, atol=1e-15)
    np.testing.assert_allclose(tanh_c, np.tanh(c), rtol=1e-15)
    np.testing.assert_allclose(act[:, 2 * H:3 * H], g, rtol=1e-15)


def test_python_backward_matches_finite_differences():
    z, c_prev = _gate_inputs(B=2, H=3, seed=4, scale=1.0)
    rng = np.random.default_rng(1)
    dh, dc = rng.normal(size=(2, 3)), rng.normal(size=(2, 3))

    def objective(zz, cp):
        _, c, _, h = PY.lstm_gates_forward(zz, cp)
        return float(np.sum(h * dh) + np.sum(c * dc))

    act, c, tanh_c, _ = PY.lstm_gates_forward(z, c_prev)
    dz, dcp = PY.lstm_gates_backward(act, c_prev, tanh_c, dh, dc)
    step = 1e-6
    for arr, grad in ((z, dz), (c_prev, dcp)):
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + step
            up = objective(z, c_prev)
            arr[idx] = orig - step
            down = objective(z, c_prev)
            arr[idx] = orig
            assert grad[idx] == pytest.approx((up - down) / (2 * step), rel=1e-6, abs=1e-9)


@needs_compiled
@pytest.mark.parametrize("B,H", [(1, 1), (3, 4), (32, 32), (17, 64)])
def test_gates_forward_backends_agree(B, H):
    z, c_prev = _gate_inputs(B, H, seed=B * H)
    for a, b in zip(PY.lstm_gates_forward(z, c_prev), C.lstm_gates_forward(z, c_prev)):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)


@needs_compiled
def test_gates_extreme_inputs_finite():
    z = np.array([[-800.0, 800.0, -800.0, 800.0]])
    for mod in (PY, C):
        act, c, tanh_c, h = mod.lstm_gates_forward(z, np.zeros((1, 1)))
        assert np.all(np.isfinite(act)) and np.all(np.isfinite(h))
        assert act[0, 0] == pytest.approx(0.0, abs=1e-300) and act[0, 1] == 1.0


@needs_compiled
@pytest.mark.parametrize("B,H", [(1, 1), (5, 8), (32, 32)])
def test_gates_backward_backends_agree(B, H):
    z, c_prev = _gate_inputs(B, H, seed=7)
    act, c, tanh_c, _ = PY.lstm_gates_forward(z, c_prev)
    rng = np.random.default_rng(3)
    dh, dc = rng.normal(size=(B, H)), rng.normal(size=(B, H))
    for a, b in zip(PY.lstm_gates_backward(act, c_prev, tanh_c, dh, dc),
                    C.lstm_gates_backward(act, c_prev, tanh_c, dh, dc)):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize("mod", [PY, C], ids=["python", "cython"])
def test_preallocated_outputs(mod):
    if mod is None:
        pytest.skip("compiled kernels not built")
    z, c_prev = _gate_inputs(4, 3)
    fresh = mod.lstm_gates_forward(z, c_prev)
    bufs = [np.empty((4, 12)), np.empty((4, 3)), np.empty((4, 3)), np.empty((4, 3))]
    out = mod.lstm_gates_forward(z, c_prev, *bufs)
    for a, b, buf in zip(fresh, out, bufs):
        assert np.array_equal(a, b)
        assert b is buf or np.shares_memory(b, buf)
    with pytest.raises(ValueError):
        mod.lstm_gates_forward(z, c_prev, np.empty((4, 11)))


@needs_compiled
def test_thermal_residual_backends_agree():
    rng = np.random.default_rng(0)
    for _ in range(500):
        t_amb = rng.uniform(250, 320)
        args = (t_amb + rng.uniform(-20, 100), rng.uniform(0, 1300), t_amb, rng.uniform(0, 20))
        assert C.heat_balance_residual(*args, P) == pytest.approx(PY.heat_balance_residual(*args, P),
                                                                  rel=1e-12, abs=1e-9)


@needs_compiled
def test_thermal_solver_backends_agree():
    rng = np.random.default_rng(1)
    irr = rng.uniform(0, 1300, 300)
    ta = rng.uniform(250, 320, 300)
    v = rng.uniform(0, 20, 300)
    t_c, s_c = C.solve_cell_temperature_many(irr, ta, v, P)
    t_p, s_p = PY.solve_cell_temperature_many(irr, ta, v, P)
    assert np.array_equal(s_c, s_p) and not s_c.any()
    np.testing.assert_allclose(t_c, t_p, rtol=0, atol=1e-9)
    for k in range(0, 300, 37):
        assert C.solve_cell_temperature(irr[k], ta[k], v[k], P)[0] == t_c[k]


def test_env_var_forces_python_backend():
    code = "from nlforecast import _kernels; print(_kernels.BACKEND)"
    env = dict(os.environ, NLFORECAST_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
