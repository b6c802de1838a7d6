"""Optional compiled kernels.

The extension is built when Cython and a C compiler are available;
otherwise the package installs pure-Python and ``csoutsource.kernels``
falls back to numpy at import time.
"""
import os

from setuptools import setup
from setuptools.command.build_ext import build_ext

ext_modules = []
if not os.environ.get("CSOUTSOURCE_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("csoutsource._kernels", ["src/csoutsource/_kernels.pyx"],
                       include_dirs=[numpy.get_include()],
                       # -O3 lets gcc vectorize the byte loops; MSVC spells it differently
                       extra_compile_args=[] if os.name == "nt" else ["-O3"],
                       define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
            compiler_directives={"language_level": "3", "boundscheck": False,
                                 "wraparound": False, "cdivision": True},
        )
    except ImportError:
        ext_modules = []


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled kernels not built ({exc}); using fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc}); using fallback")


setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
