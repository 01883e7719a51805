from .gray import GrayImage                                     # noqa: F401
from .gray import downsample, upsample, crop_to_multiple        # noqa: F401
from .gray import psnr, mean_abs_error                          # noqa: F401
