"""Build script for the optional compiled kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so any failure to cythonize or compile downgrades the install
to pure Python instead of aborting it.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any build failure is non-fatal
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"warning: compiled kernels not built ({exc!r}); "
            "falling back to the pure NumPy implementation",
            file=sys.stderr,
        )


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not available, skipping compiled kernels", file=sys.stderr)
        return []
    import os

    pyx = os.path.join("src", "kryode", "kernels", "_ckernels.pyx")
    if not os.path.exists(pyx):
        print(f"warning: {pyx} not found, skipping compiled kernels", file=sys.stderr)
        return []
    ext = Extension("kryode.kernels._ckernels", [pyx], extra_compile_args=["-O3"])
    return cythonize([ext], language_level="3")


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
