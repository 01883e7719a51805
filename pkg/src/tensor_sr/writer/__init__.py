from .model import SRModel, encode_model, decode_model, dump_model, load_model  # noqa: F401
from .csv import write_csv  # noqa: F401
