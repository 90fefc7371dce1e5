"""Builds the optional compiled scan kernel.

The package is fully functional without it: sowgen.vecstore.kernel falls
back to a numpy implementation when the extension is missing or Cython is
unavailable at build time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sowgen.vecstore._native",
                ["src/sowgen/vecstore/_native.pyx"],
                extra_compile_args=["-O3", "-funroll-loops"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
