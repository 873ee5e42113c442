"""Build the optional compiled SMATCH kernel.

Without Cython (or a C compiler) the package installs pure-Python and
``qamrkit.metrics.smatch`` falls back to ``_smatch_py`` at import time.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("QAMRKIT_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("qamrkit.metrics._smatch_ext", ["src/qamrkit/metrics/_smatch_ext.pyx"],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
