import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; kernels fall back at import
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("MAINTVAR_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "maintvar._ckernels",
                ["src/maintvar/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                # fp-contract off keeps the forecast recursion bitwise equal
                # to the pure-Python fallback (no fused multiply-add)
                extra_compile_args=["-O2", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
