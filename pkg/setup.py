import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # the NumPy fallback in heisplane._kernels_py is used instead
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("heisplane._ckernels", ["src/heisplane/_ckernels.pyx"],
                   include_dirs=[np.get_include()], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
