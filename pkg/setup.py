from Cython.Build import cythonize
from setuptools import Extension, setup

setup(
    ext_modules=cythonize(
        [Extension("brdlab._kernels", ["src/brdlab/_kernels.pyx"], optional=True)],
        compiler_directives={"language_level": "3"},
    )
)
