"""Build script: compiles the optional Cython kernels.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so a missing compiler or Cython only costs speed.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, otherwise warn and continue."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping C extension build ({exc}); "
                  "falling back to the pure-NumPy kernels")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); "
                  "falling back to the pure-NumPy kernels")


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "conepack._core",
        ["src/conepack/_core.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
