"""Kernel selection: compiled extension when available, pure Python otherwise.

Set CRCARTAN_KERNEL=py or =cy to force a backend; forcing cy raises if the
extension was not built.
"""

import os

_choice = os.environ.get("CRCARTAN_KERNEL", "")

if _choice == "py":
    from . import _termops_py as _impl
elif _choice == "cy":
    from . import _termops_cy as _impl
elif _choice:
    raise ImportError("CRCARTAN_KERNEL must be 'py' or 'cy', got %r" % _choice)
else:
    try:
        from . import _termops_cy as _impl
    except ImportError:
        from . import _termops_py as _impl

BACKEND = "cy" if _impl.__name__.endswith("_cy") else "py"

add_terms = _impl.add_terms
sub_terms = _impl.sub_terms
neg_terms = _impl.neg_terms
scale_terms = _impl.scale_terms
mul_terms = _impl.mul_terms
div_terms_exact = _impl.div_terms_exact
