"""Build script: compiles the hot physics kernel as a C extension.

The kernel source (src/quadarena/_kernel.py) is written in Cython pure-Python
mode, so the very same file also runs uncompiled as the fallback backend.
If Cython or a C compiler is unavailable the install still succeeds and the
package transparently uses the interpreted kernel.

-ffp-contract=off is required: it forbids FMA contraction so the compiled
kernel is bit-for-bit identical to the interpreted one.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/quadarena/_kernel.py"],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
        if sys.platform != "win32":
            # -ffp-contract=off forbids FMA contraction; -fno-builtin-sincos
            # stops GCC from fusing adjacent sin/cos into glibc sincos, which
            # rounds differently in the last ulp. Both are required for the
            # compiled kernel to match the interpreted one bit-for-bit.
            ext.extra_compile_args += ["-O2", "-ffp-contract=off",
                                       "-fno-builtin-sin", "-fno-builtin-cos",
                                       "-fno-builtin-sincos"]
except ImportError as exc:  # pragma: no cover - degraded install path
    print(f"quadarena: building without compiled kernel ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
