"""Build script for the optional compiled kernel extension.

The package works without the extension (a numpy/scipy fallback is selected
at import time); building it just makes training noticeably faster.  The
extension is skipped with a warning when Cython or a C compiler is missing.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "banglabot._ckernels",
                ["src/banglabot/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # -ffp-contract=off keeps the compiled kernels bit-compatible
                # with numpy's per-operation rounding (no FMA contraction).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )
except ImportError as exc:  # pragma: no cover - build-environment dependent
    print(f"banglabot: skipping compiled kernels ({exc}); "
          "the pure numpy backend will be used", file=sys.stderr)

setup(ext_modules=ext_modules)
