"""Optional Cython build of the simulator kernel.

The event-loop kernel lives in src/fabriclab/sim/_kernel.py and is plain
Python.  At build time we copy it to _kernel_c.py and compile that copy as a
C extension; fabriclab.sim.engine prefers the compiled module and falls back
to the pure interpreter version when the extension is unavailable.  Both
backends run the identical source, so results are bit-identical.
"""

import shutil
from pathlib import Path

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    here = Path(__file__).parent
    src = here / "src" / "fabriclab" / "sim" / "_kernel.py"
    gen = src.with_name("_kernel_c.py")
    shutil.copyfile(src, gen)
    # setuptools requires /-separated paths relative to this file
    rel = gen.relative_to(here).as_posix()
    ext_modules = cythonize(
        [Extension("fabriclab.sim._kernel_c", [rel])],
        language_level=3,
        quiet=True,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"fabriclab: skipping Cython kernel build ({exc}); using pure-Python kernel")

setup(ext_modules=ext_modules)
