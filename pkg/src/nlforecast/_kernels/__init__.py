"""Hot-loop kernels with a compiled backend and a pure-Python fallback.

The Cython extensions ``_clstm`` and ``_cthermal`` are used when they were
built; otherwise (or when ``NLFORECAST_PURE_PYTHON=1`` is set) the numpy
implementations in ``_pykernels`` are used.  Both expose the same functions.
"""

import os
from types import SimpleNamespace

from . import _pykernels as python_backend

try:
    from . import _clstm, _cthermal
except ImportError:  # extensions not built
    compiled_backend = None
else:
    compiled_backend = SimpleNamespace(
        NAME="cython",
        lstm_gates_forward=_clstm.lstm_gates_forward,
        lstm_gates_backward=_clstm.lstm_gates_backward,
        heat_balance_residual=_cthermal.heat_balance_residual,
        solve_cell_temperature=_cthermal.solve_cell_temperature,
        solve_cell_temperature_many=_cthermal.solve_cell_temperature_many,
    )

if compiled_backend is not None and os.environ.get("NLFORECAST_PURE_PYTHON", "") in ("", "0"):
    backend = compiled_backend
else:
    backend = python_backend

BACKEND = backend.NAME

lstm_gates_forward = backend.lstm_gates_forward
lstm_gates_backward = backend.lstm_gates_backward
heat_balance_residual = backend.heat_balance_residual
solve_cell_temperature = backend.solve_cell_temperature
solve_cell_temperature_many = backend.solve_cell_temperature_many

__all__ = [
    "BACKEND",
    "backend",
    "compiled_backend",
    "python_backend",
    "lstm_gates_forward",
    "lstm_gates_backward",
    "heat_balance_residual",
    "solve_cell_temperature",
    "solve_cell_temperature_many",
]
