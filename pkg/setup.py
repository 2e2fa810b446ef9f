import os

from setuptools import Extension, setup

# The compiled kernels are optional: RECIPEALIGN_NO_EXT=1 skips the build and
# the package falls back to the numpy implementations at import time.
ext_modules = []
if not os.environ.get("RECIPEALIGN_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "recipealign._kernels._core",
                    ["src/recipealign/_kernels/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
