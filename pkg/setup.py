"""Build script: compiles the optional Cython kernel core.

The extension is a pure accelerator. If Cython or a C compiler is missing the
build falls through to a pure-Python install and ricci_ovals.kernels selects
the numpy backend at import time.
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
                "ricci_ovals._core",
                ["src/ricci_ovals/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - environment dependent
    warnings.warn(f"Cython kernel core not built ({exc}); using the numpy backend.")
    ext_modules = []

setup(ext_modules=ext_modules)
