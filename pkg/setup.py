from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "heva._mc_cy",
                ["src/heva/_mc_cy.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Compiled walker is optional; heva._mc falls back to the pure-Python
    # implementation when the extension is missing.
    ext_modules = []

setup(ext_modules=ext_modules)
