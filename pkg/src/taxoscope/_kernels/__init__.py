"""Kernel backend selection.

The compiled extension is preferred when it built; the pure-Python twin
is always available. Set ``TAXOSCOPE_PURE_PYTHON=1`` to force the
fallback (used by the benchmark and the equivalence tests).
"""

import os

from . import pyscan

_IMPLEMENTATIONS = {"python": pyscan.scan}
_selected = "python"

if os.environ.get("TAXOSCOPE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _scan as _compiled

        _IMPLEMENTATIONS["compiled"] = _compiled.scan
        _selected = "compiled"
    except ImportError:
        pass
else:
    try:
        from . import _scan as _compiled

        _IMPLEMENTATIONS["compiled"] = _compiled.scan
    except ImportError:
        pass

scan = _IMPLEMENTATIONS[_selected]


def backend_name() -> str:
    return _selected


def available_backends() -> list:
    return sorted(_IMPLEMENTATIONS)


def get_scan(name=None):
    """Return a scan implementation by backend name (None = selected)."""
    if name is None:
        return scan
    try:
        return _IMPLEMENTATIONS[name]
    except KeyError:
        raise KeyError(f"kernel backend {name!r} not available "
                       f"(have: {', '.join(available_backends())})") from None
