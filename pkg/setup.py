"""Build script: compiles the optional accelerator extension.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here degrades to a pure-Python install.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except Exception:
    cythonize = None

ext_modules = []
if cythonize is not None:
    # -ffp-contract=off keeps the C arithmetic bit-identical to the numpy
    # fallback (no FMA fusion); required for cross-backend stream equality.
    ext_modules = cythonize(
        [
            Extension(
                "critsds._kernels._core",
                ["src/critsds/_kernels/_core.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
