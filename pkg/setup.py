from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the package falls back at import
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("sirdelay._kernels", ["src/sirdelay/_kernels.pyx"],
                   extra_compile_args=["-O3", "-ffp-contract=off"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
