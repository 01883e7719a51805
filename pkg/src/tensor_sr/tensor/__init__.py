from .core import Tensor3, SpectralTensor                       # noqa: F401
from .core import tproduct, ttranspose, circulant_unfold        # noqa: F401
from .core import fft3, ifft3                                   # noqa: F401
from .core import frob_norm, l1_norm, slice_norm_sq, atom_norms_sq  # noqa: F401
from .core import zeros, identity_tensor, random_tensor         # noqa: F401
