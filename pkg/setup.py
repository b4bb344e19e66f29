"""Build script: compiles the labelling-walk kernel when Cython is available.

The package works without the extension (a pure-Python walk is selected at
import time), so a failed extension build only costs speed.
"""
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# -ffp-contract=off keeps C double arithmetic bit-identical to the pure
# Python fallback (no FMA contraction), which the parity tests require.
extensions = [
    Extension(
        "latkit._kernel",
        ["src/latkit/_kernel.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(extensions, language_level="3") if cythonize else [],
)
