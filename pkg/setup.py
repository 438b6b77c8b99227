"""Build script: compiles the optional quadrature kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile only costs speed, not functionality.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "halfline_utm._kernels",
                ["src/halfline_utm/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": 3, "boundscheck": False, "wraparound": False},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    import sys

    print(f"halfline-utm: skipping compiled kernels ({exc!r})", file=sys.stderr)

setup(ext_modules=ext_modules)
