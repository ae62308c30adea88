import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

from distutils.errors import CCompilerError, DistutilsExecError, DistutilsPlatformError


class BuildFailed(Exception):
    pass


class optional_build_ext(build_ext):
    # The compiled kernels are an optimization; a failed build must not
    # block installation of the pure-python package.
    def run(self):
        try:
            super().run()
        except (DistutilsPlatformError, FileNotFoundError) as exc:
            raise BuildFailed() from exc

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except (CCompilerError, DistutilsExecError, DistutilsPlatformError, ValueError) as exc:
            raise BuildFailed() from exc


def make_extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "sellkit._kernels",
        sources=["src/sellkit/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=[] if sys.platform == "win32" else ["-O3"],
    )
    return cythonize([ext], language_level=3)


def run_setup(with_ext):
    kwargs = {}
    if with_ext:
        exts = make_extensions()
        if not exts:
            with_ext = False
        else:
            kwargs["ext_modules"] = exts
            kwargs["cmdclass"] = {"build_ext": optional_build_ext}
    setup(**kwargs)
    return with_ext


try:
    run_setup(True)
except BuildFailed:
    print("WARNING: compiled kernels failed to build, installing pure-python fallback only",
          file=sys.stderr)
    run_setup(False)
