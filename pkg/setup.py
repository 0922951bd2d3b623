"""Build script for the optional compiled transfer-matrix kernels.

The package is fully functional without the extension; the pure NumPy
fallback in ``canograph._kernels.fallback`` is selected at import time
whenever ``canograph._kernels._core`` is missing.
"""

import os

from setuptools import Extension, setup


def _extensions():
    if os.environ.get("CANOGRAPH_NO_EXTENSION"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "canograph._kernels._core",
        sources=["src/canograph/_kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=_extensions())
