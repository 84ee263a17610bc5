"""Reference governors for pre-stabilized linear loops with polynomial
constraints under bounded parametric uncertainty.

The compiled extension lives inside this package in an installed wheel and
on the interpreter path in a build tree; both layouts are accepted here.
"""

try:
    from ._rgov import *  # noqa: F401,F403
    from . import _rgov as _impl
except ImportError:  # build tree: extension sits next to the package dir
    from _rgov import *  # noqa: F401,F403
    import _rgov as _impl

__doc__ = _impl.__doc__
__all__ = [name for name in dir(_impl) if not name.startswith("_")]
