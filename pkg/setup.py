"""Build script: compiles the interleaved-simulation kernel when Cython is available.

The package works without the extension (a pure-Python engine is selected at
import time), so the build degrades gracefully on platforms without a C
toolchain.
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
                "smoothverify.lab._interleave_core",
                ["src/smoothverify/lab/_interleave_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
