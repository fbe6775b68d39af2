from setuptools import Extension, setup

import numpy as np

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "cfmimo._kernels",
                ["src/cfmimo/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except ImportError:
    # Pure-Python install still works: cfmimo.backend falls back to the
    # numpy kernels when the compiled module is absent.
    extensions = []

setup(ext_modules=extensions)
