import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "qfolio._statevector_cy",
                ["src/qfolio/_statevector_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
    # The package falls back to the numpy kernels when the extension is absent,
    # so a failed compile should not abort the install.
    for ext in ext_modules:
        ext.optional = True

setup(ext_modules=ext_modules)
