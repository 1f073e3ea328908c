import os

from setuptools import setup

ext_modules = []
if os.environ.get("BBMLAB_NO_EXT") != "1":
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "bbmlab.kernels.ckernels",
                ["src/bbmlab/kernels/ckernels.pyx"],
                extra_compile_args=["-O3", "-funroll-loops", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
