"""Build script for the optional compiled kernel extension.

The package works without the extension; stutterfuzz._kernels falls back to
the numpy implementation when the compiled module is absent.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "stutterfuzz._kernels._native",
                ["src/stutterfuzz/_kernels/_native.pyx"],
                include_dirs=[np.get_include()],
                # fp-contract off keeps float results identical to the
                # numpy fallback (no fused multiply-add on either path).
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
