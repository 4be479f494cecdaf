from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # the pure-Python core is used instead
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("switchwalk.montecarlo._core", ["src/switchwalk/montecarlo/_core.pyx"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
