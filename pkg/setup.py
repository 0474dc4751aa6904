"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time); building it just makes the per-step element loops
faster. Any failure here must therefore not fail the install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize
    import numpy as np

    ext = Extension(
        "formrelax.backends._kernels",
        ["src/formrelax/backends/_kernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    ext.optional = True
    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
