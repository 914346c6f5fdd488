"""Build script for the compiled convolution/pooling kernels.

The extension is optional: if it fails to build or import, the package
falls back to the numpy kernels in moodtunes.nn._pykernels.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "moodtunes.nn._ckernels",
    ["src/moodtunes/nn/_ckernels.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    extra_compile_args=["-O3"],
)

setup(
    ext_modules=cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    ),
)
