import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off: the fallback backend must stay bit-identical to the
# compiled kernels, so FMA contraction of a*b+acc is not allowed.
ext_modules = [
    Extension(
        "cfxkit.kernels._core",
        ["src/cfxkit/kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(ext_modules, language_level=3))
