import os

from setuptools import Extension, setup

# The native kernels are an optional speedup; the package falls back to the
# pure-python implementations when the extension is absent.
# No -ffast-math: the compiled kernels must stay bit-identical to pyref.
ext_modules = []
if os.environ.get("PROBEWATCH_NO_NATIVE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "probewatch.kernels._native",
                    ["src/probewatch/kernels/_native.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
