"""Build script: compiles the optional Cython kernels when Cython is available.

The package works without the extension (pure-numpy fallbacks live in
apmlab._kernels._pykernels); a failed or skipped compilation is not an error.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext = Extension(
        "apmlab._kernels._ckernels",
        ["src/apmlab/_kernels/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})
except ImportError:
    pass

setup(ext_modules=ext_modules)
