from setuptools import setup, Extension

import numpy

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "panocube._kernels_c",
                sources=["src/panocube/_kernels_c.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                optional=True,  # fall back to the numpy kernels if the build fails
            )
        ],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": 3,
        },
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
