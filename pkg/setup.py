import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off keeps the compiled kernels bit-identical to the numpy fallback
extensions = [
    Extension(
        "brownkit._core",
        ["src/brownkit/_core.pyx"],
        include_dirs=[np.get_include(), "src/brownkit"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3", "-march=native", "-ffp-contract=off"],
        libraries=["m"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
