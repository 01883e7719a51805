from ..writer import SRModel, load_model, dump_model                  # noqa: F401
from .source import LowResSource, DirectorySource, image_files       # noqa: F401
from .train import TrainSpec, train_model                             # noqa: F401
from .superres import super_resolve, baseline, super_resolve_source   # noqa: F401
from .superres import generation_config, generation_dictionaries      # noqa: F401
from .evaluate import EvalRow, EvalReport, eval_model                 # noqa: F401
