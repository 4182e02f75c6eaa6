"""Build the optional Cython eigensolver kernel.

The package works without it; ``noiseless.linalg`` falls back to the
pure-Python Jacobi implementation when the extension is missing.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("NOISELESS_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "noiseless.linalg._jacobi_ext",
                    ["src/noiseless/linalg/_jacobi_ext.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
