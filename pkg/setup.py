"""Build script: compiles the optional Cython kernel extension.

If Cython or a C compiler is unavailable the package still installs; the
pure-NumPy fallback in pposmooth._kernels is selected at import time.
"""
from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "pposmooth._kernels._core",
                ["src/pposmooth/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
