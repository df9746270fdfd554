"""Build script: compiles the optional extension core.

The package works without the extension (a pure-Python fallback is selected
at import time); a missing compiler or Cython therefore degrades the build
instead of failing it.
"""

import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # no compiler: fall back to pure Python
            warnings.warn(f"skipping compiled core, using pure-Python kernels: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping {ext.name}, using pure-Python kernels: {exc}")


ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [Extension("dope._core", ["src/dope/_core.pyx"],
                   include_dirs=[numpy.get_include()],
                   extra_compile_args=["-O3"])],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
except ImportError as exc:
    warnings.warn(f"Cython/numpy unavailable ({exc}); building without compiled core")

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
