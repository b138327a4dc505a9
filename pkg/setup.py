"""Build script: compiles the optional fast summary kernel when Cython is available.

The package works without the extension (a pure Python twin is selected at
import time), so any build failure here just means the slow path ships.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "skewprod._summary_fast",
                ["src/skewprod/_summary_fast.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
