"""Build script: compiles the optional Cython LSTM kernel.

The package works without the extension (a numpy fallback is selected at
import time), so a failed cythonize/compile is downgraded to a warning.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "assistlm.numgrad._kernels",
                ["src/assistlm/numgrad/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    warnings.warn(f"Cython kernel not built ({exc}); using the pure-python fallback")

setup(ext_modules=ext_modules)
