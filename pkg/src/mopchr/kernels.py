"""Select the compiled kernels when available.

Set ``MOPCHR_PURE=1`` to force the pure-Python implementations.  The
exact backend always uses the pure-Python code because the compiled
module only handles float64 and complex128.
"""
import os

from . import _pykernels as pure

compiled = None
if os.environ.get("MOPCHR_PURE", "").strip() not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled  # noqa: F811
    except ImportError:  # pragma: no cover - depends on the build
        compiled = None

HAVE_COMPILED = compiled is not None


def for_field(field):
    """Kernel module to use for scalars of ``field``."""
    if field.exact or compiled is None:
        return pure
    return compiled


__all__ = ["pure", "compiled", "HAVE_COMPILED", "for_field"]
