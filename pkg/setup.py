import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python fallback is used at runtime
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("SSNPMM_NO_EXT"):
    extensions = [
        Extension(
            "ssnpmm.linalg._kernels",
            ["src/ssnpmm/linalg/_kernels.pyx"],
            include_dirs=[np.get_include()],
            language="c++",
            extra_compile_args=["-O3"],
        )
    ]
    ext_modules = cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
