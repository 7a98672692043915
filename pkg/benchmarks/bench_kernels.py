"""Compiled vs pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Gate and thermal kernels are timed in-process against both backends.  The
training step is timed in a child process per backend, because the model
binds its kernels at import time.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def gate_cases(backend, B=32, H=32, seed=0):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(B, 4 * H))
    c_prev = rng.normal(size=(B, H))
    act, c, tanh_c, h = (np.empty((B, 4 * H)), np.empty((B, H)), np.empty((B, H)), np.empty((B, H)))
    dh, dc = rng.normal(size=(B, H)), rng.normal(size=(B, H))
    dz, dc_prev = np.empty((B, 4 * H)), np.empty((B, H))
    backend.lstm_gates_forward(z, c_prev, act, c, tanh_c, h)
    return (
        lambda: backend.lstm_gates_forward(z, c_prev, act, c, tanh_c, h),
        lambda: backend.lstm_gates_backward(act, c_prev, tanh_c, dh, dc, dz, dc_prev),
    )


def thermal_case(backend):
    from nlforecast.data import generate_synthetic_year
    from nlforecast.solar import AirProperties, PvArraySpec, pack_params

    year = generate_synthetic_year(0)
    params = pack_params(PvArraySpec(), AirProperties())
    irr = np.ascontiguousarray(year.irradiance_collector, dtype=np.float64)
    ta = np.ascontiguousarray(year.temp_ambient, dtype=np.float64)
    ws = np.ascontiguousarray(year.wind_speed, dtype=np.float64)
    return lambda: backend.solve_cell_temperature_many(irr, ta, ws, params)


def train_step_seconds(repeat):
    from nlforecast.nn import LstmModel, ModelConfig, adam_step, AdamState, loss_and_grads

    rng = np.random.default_rng(0)
    x, y = rng.normal(size=(32, 24, 5)), rng.normal(size=32)
    model = LstmModel.initialize(ModelConfig.uniform(32), np.random.default_rng(0))
    state = AdamState.for_params(model.params)

    def step():
        _, grads, cache = loss_and_grads(model, x, y, rng=rng)
        model.update_running_stats(cache)
        adam_step(model.params, grads, state)

    step()
    return best_of(step, repeat, 20)


def child_train_step(pure, repeat):
    env = dict(os.environ, NLFORECAST_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, __file__, "--child", "--repeat", str(repeat)],
                         env=env, check=True, capture_output=True, text=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.child:
        from nlforecast import BACKEND
        print(json.dumps({"backend": BACKEND, "seconds": train_step_seconds(args.repeat)}))
        return

    from nlforecast import _kernels
    if _kernels.compiled_backend is None:
        sys.exit("compiled kernels are not built; run `pip install -e .` first")
    backends = {"cython": _kernels.compiled_backend, "python": _kernels.python_backend}

    rows = []
    timings = {name: gate_cases(b) for name, b in backends.items()}
    rows.append(("gate forward, B=32 H=32",
                 *(best_of(timings[n][0], args.repeat, 2000) for n in backends)))
    rows.append(("gate backward, B=32 H=32",
                 *(best_of(timings[n][1], args.repeat, 2000) for n in backends)))
    rows.append(("cell temperature, 8760 hours",
                 *(best_of(thermal_case(b), args.repeat, 1) for b in backends.values())))
    compiled = child_train_step(False, args.repeat)
    pure = child_train_step(True, args.repeat)
    assert (compiled["backend"], pure["backend"]) == ("cython", "python")
    rows.append(("training step, B=32 W=24 H=32", compiled["seconds"], pure["seconds"]))

    print(f"{'kernel':<32}{'cython':>12}{'python':>12}{'speedup':>10}")
    for label, fast, slow in rows:
        print(f"{label:<32}{fast * 1e3:>10.3f}ms{slow * 1e3:>10.3f}ms{slow / fast:>9.1f}x")


if __name__ == "__main__":
    main()
