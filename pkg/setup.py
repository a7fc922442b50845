"""Build script: compiles the optional lattice-stepper extension.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes single-trajectory solves faster.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("MINTC_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "mintc.sim.kernels._lattice_cy",
                    ["src/mintc/sim/kernels/_lattice_cy.pyx"],
                )
            ],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
