"""Build script for the compiled CSR propagation kernels.

The extension is optional at runtime: if it is missing, dgc._kernels falls
back to a scipy-based implementation selected at import time.
"""
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "dgc._kernels._csr_cy",
        ["src/dgc/_kernels/_csr_cy.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
