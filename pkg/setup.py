import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("NLFORECAST_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                # gate nonlinearities dominate training time; fast-math lets
                # gcc use the vectorized libm exp/tanh
                Extension(
                    "nlforecast._kernels._clstm",
                    ["src/nlforecast/_kernels/_clstm.pyx"],
                    extra_compile_args=["-O3", "-ffast-math"],
                    libraries=["mvec", "m"],
                ),
                # strict IEEE: the solver relies on exact sign tests and NaN
                Extension(
                    "nlforecast._kernels._cthermal",
                    ["src/nlforecast/_kernels/_cthermal.pyx"],
                    extra_compile_args=["-O3"],
                ),
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
