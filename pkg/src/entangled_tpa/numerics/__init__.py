from .optimize import differentiate_central, find_root_bracketed, maximize_scalar
from .quadrature import QuadratureResult, integrate_adaptive
from .special import erfi_complex, faddeeva, scaled_erfi_minus_i

__all__ = [
    "QuadratureResult",
    "differentiate_central",
    "erfi_complex",
    "faddeeva",
    "find_root_bracketed",
    "integrate_adaptive",
    "maximize_scalar",
    "scaled_erfi_minus_i",
]
