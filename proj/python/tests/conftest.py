import os
import sys

# ctest points LONGRUN_PYPKG at the package tree of the CMake build; make that
# copy win over an editable install so the tests exercise the freshly built module.
_pkg = os.environ.get("LONGRUN_PYPKG")
if _pkg:
    sys.meta_path[:] = [f for f in sys.meta_path if "ScikitBuild" not in type(f).__name__]
    sys.path.insert(0, _pkg)
    for name in [m for m in sys.modules if m == "longrun" or m.startswith("longrun.")]:
        del sys.modules[name]
