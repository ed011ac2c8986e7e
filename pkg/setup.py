"""Build script: compiles the optional extension kernels.

The package works without the extension (a pure-Python backend is selected
at import time), so a failed compile only costs speed. Set
INAR1_SKIP_EXTENSION=1 to skip the build entirely.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible; degrade to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"WARNING: building inar1._kernels_cy failed ({exc}); "
            "falling back to the pure-Python kernels",
            file=sys.stderr,
        )


ext_modules = []
cmdclass = {}
if os.environ.get("INAR1_SKIP_EXTENSION") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("inar1._kernels_cy", ["src/inar1/_kernels_cy.pyx"])],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
        cmdclass = {"build_ext": optional_build_ext}
    except ImportError:
        print(
            "WARNING: Cython not available; installing with pure-Python kernels",
            file=sys.stderr,
        )

setup(ext_modules=ext_modules, cmdclass=cmdclass)
