from .config import FoldConfig, default_shifts, FILTER_SET_DERIVATIVES  # noqa: F401
from .fold import TensorBlock, shift_concat, extract_features           # noqa: F401
from .fold import sample_origins, fold, fold_features, unfold           # noqa: F401
from .fold import cube_means, remove_cube_means, add_cube_means         # noqa: F401
