import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "cghkit.kernels._core",
        ["src/cghkit/kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -fcx-limited-range: plain complex multiply, as numpy does; avoids
        # the __muldc3 libcall in the hot loops.
        extra_compile_args=["-O3", "-fcx-limited-range"],
    )
]

setup(
    # Without Cython the package still installs; the pure NumPy kernels are
    # picked up at import time instead of the compiled core.
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"})
    if cythonize
    else [],
)
