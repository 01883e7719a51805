from .fista import SparseCodeConfig, CodingResult                   # noqa: F401
from .fista import soft_threshold, grad_f, lipschitz_constant       # noqa: F401
from .fista import objective, fista                                 # noqa: F401
