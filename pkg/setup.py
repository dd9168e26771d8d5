"""Build script: compiles the accelerated assembly kernels when Cython and a C
compiler are available, and falls back to a pure-python install otherwise."""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "boojum._accel",
                sources=["src/boojum/_accel.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"accelerated kernels disabled ({exc}); installing pure-python build")

setup(ext_modules=ext_modules)
