from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install, kernels fall back at import
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("fairck._kernels", ["src/fairck/_kernels.pyx"], optional=True)],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )

setup(ext_modules=ext_modules)
