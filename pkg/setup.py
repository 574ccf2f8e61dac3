"""Build the optional compiled run-loop kernel.

Without Cython (or a C compiler) the package installs pure-Python and selects
the fallback kernel at import time.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("UNIMODAL_ASTAR_NO_EXT") != "1":
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
                    "unimodal_astar._ckernel",
                    ["src/unimodal_astar/_ckernel.pyx"],
                    include_dirs=[np.get_include()],
                    # no fast-math / fp contraction: results must match the Python path bit for bit
                    extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
