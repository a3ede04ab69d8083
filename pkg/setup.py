"""Build hook: compiles the integer-kernel extension when Cython is available.

The package is fully functional without the extension (a pure-Python twin of
every kernel ships in rubinstark._kernels._pure); the extension only removes
interpreter overhead from the exact linear-algebra inner loops.  Build
failures therefore must never fail the install: the Extension is marked
optional.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rubinstark._kernels._fast",
                ["src/rubinstark/_kernels/_fast.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
