"""Build hook: compile the derivation kernel as a C extension.

The kernel module is plain Python that Cython can compile unchanged. When
the toolchain is missing the install still succeeds and the same file is
imported as ordinary Python; CFGEN_PURE_KERNEL=1 forces that path even
when the extension is present.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/cfgen/_kernel.py"],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
