"""Build the optional compiled echelon kernel.

The package works without it (pure-Python fallback); set
``SYMFER_NO_EXT=1`` to skip compilation entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("SYMFER_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "symfer._echelon_ext",
                    ["src/symfer/_echelon_ext.pyx"],
                    include_dirs=["src/symfer"],
                    libraries=["gmpxx", "gmp"],
                    language="c++",
                    extra_compile_args=["-O3", "-std=c++17"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
