import os
import sys

# ctest points this at the freshly built module; an editable install would shadow it
_tree = os.environ.get("GAUGEP_BUILD_TREE")
if _tree:
    sys.meta_path[:] = [f for f in sys.meta_path if "_editable" not in type(f).__module__]
    sys.path.insert(0, _tree)
    for name in [m for m in sys.modules if m == "gaugep" or m.startswith("gaugep.")]:
        del sys.modules[name]
