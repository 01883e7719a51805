"""
The binary model format.

    magic        4 bytes  "TSR1"
    header       u32 LE   version, a, r, c, m, n, d_h, d_l, seed
                 f64 LE   lambda
                 r x 2    i8 shifts (dx, dy)
                 u8       filter set id
    payload      f64 LE   dh then dl, slice-major (k, i, j)
    trailer      u32 LE   CRC32 of all preceding bytes

Training metadata that does not fit in the header goes to a JSON sidecar
file, named as the model file plus a ".json" suffix
"""

import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

from typing import Dict, Tuple, Union

import numpy as np

from pii_data.helper.io import openfile

from ..helper.exception import ConfigError, ModelFormatError, ModelChecksumError
from ..tensor import Tensor3
from ..fold import FoldConfig, FILTER_SET_DERIVATIVES
from ..dictionary import DictionaryPair, TrainingMeta

TYPE_PATH = Union[str, Path]

MAGIC = b"TSR1"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4s9Id")
_CRC = struct.Struct("<I")


@dataclass(frozen=True, eq=False)
class SRModel:
    """
    A trained super-resolution model: the dictionary pair plus the format
    identifiers it was stored with
    """
    pair: DictionaryPair
    version: int = FORMAT_VERSION
    filter_set: int = FILTER_SET_DERIVATIVES

    @property
    def fold(self) -> FoldConfig:
        return self.pair.fold

    @property
    def meta(self) -> TrainingMeta:
        return self.pair.meta

    @property
    def dh(self) -> Tensor3:
        return self.pair.dh

    @property
    def dl(self) -> Tensor3:
        return self.pair.dl

    @property
    def dims(self) -> Tuple[int, int, int, int]:
        """(d_h, d_l, m, n)"""
        d_h, m, n = self.dh.dims
        return d_h, self.dl.dims[0], m, n


def _payload(t: Tensor3) -> bytes:
    return np.ascontiguousarray(t.slices, dtype="<f8").tobytes()


def encode_model(model: SRModel) -> bytes:
    """
    Serialize a model into its binary form
    """
    cfg = model.fold
    d_h, d_l, m, n = model.dims
    buf = bytearray(_HEADER.pack(MAGIC, model.version, cfg.a, cfg.r, cfg.c, m, n,
                                 d_h, d_l, model.meta.seed, model.meta.lam))
    buf += struct.pack("<{}b".format(2 * cfg.r), *(v for s in cfg.shifts for v in s))
    buf += struct.pack("<B", model.filter_set)
    buf += _payload(model.dh)
    buf += _payload(model.dl)
    buf += _CRC.pack(zlib.crc32(buf))
    return bytes(buf)


def _tensor(data: bytes, offset: int, dims: Tuple[int, int, int]) -> Tuple[Tensor3, int]:
    d, m, n = dims
    size = d * m * n
    arr = np.frombuffer(data, dtype="<f8", count=size, offset=offset)
    return Tensor3.from_slices(arr.reshape(n, d, m).astype(np.float64)), offset + 8 * size


def decode_model(data: bytes, meta: Dict = None) -> SRModel:
    """
    Rebuild a model from its binary form
      :param data: the model bytes
      :param meta: the contents of the metadata sidecar, if available
    """
    if len(data) < _HEADER.size + _CRC.size or data[:4] != MAGIC:
        raise ModelFormatError("not a tensor super-resolution model")
    body, (crc,) = data[:-_CRC.size], _CRC.unpack(data[-_CRC.size:])
    if zlib.crc32(body) != crc:
        raise ModelChecksumError()

    (_, version, a, r, c, m, n, d_h, d_l, seed, lam) = _HEADER.unpack_from(body)
    if version != FORMAT_VERSION:
        raise ModelFormatError("unsupported model format version: {}", version)
    pos = _HEADER.size
    if len(body) < pos + 2 * r + 1:
        raise ModelFormatError("truncated model header")
    raw = struct.unpack_from("<{}b".format(2 * r), body, pos)
    shifts = tuple(zip(raw[0::2], raw[1::2]))
    pos += 2 * r
    (filter_set,) = struct.unpack_from("<B", body, pos)
    pos += 1
    if filter_set != FILTER_SET_DERIVATIVES:
        raise ModelFormatError("unknown filter set: {}", filter_set)
    if len(body) != pos + 8 * m * n * (d_h + d_l):
        raise ModelFormatError("payload size does not match dims ({}, {}, {}, {})",
                               d_h, d_l, m, n)
    if n != a or d_h != a * a or d_l != 6 * a * a:
        raise ModelFormatError("inconsistent model dims (a={}, n={}, d_h={}, d_l={})",
                               a, n, d_h, d_l)

    dh, pos = _tensor(body, pos, (d_h, m, n))
    dl, pos = _tensor(body, pos, (d_l, m, n))

    meta = meta or {}
    try:
        fold = FoldConfig(a=a, r=r, c=c, shifts=shifts,
                          sample_budget=meta.get("sample_budget", 0), seed=seed)
    except ConfigError as e:
        raise ModelFormatError("invalid model header: {}", e) from e
    info = TrainingMeta(lam=lam, seed=seed,
                        outer_iter=meta.get("outer_iter", 0),
                        inner_iter=meta.get("inner_iter", 0),
                        tol=meta.get("tol", 0.0),
                        num_samples=meta.get("num_samples", 0),
                        sample_budget=meta.get("sample_budget", 0),
                        trace=tuple(meta.get("trace", ())),
                        warnings=tuple(meta.get("warnings", ())))
    return SRModel(DictionaryPair(dh=dh, dl=dl, fold=fold, meta=info),
                   version=version, filter_set=filter_set)


# -------------------------------------------------------------------------


def sidecar_name(filename: TYPE_PATH) -> str:
    return str(filename) + ".json"


def model_metadata(model: SRModel) -> Dict:
    m = model.meta
    return {
        "format": MAGIC.decode("ascii"),
        "outer_iter": m.outer_iter,
        "inner_iter": m.inner_iter,
        "tol": m.tol,
        "num_samples": m.num_samples,
        "sample_budget": m.sample_budget,
        "trace": list(m.trace),
        "warnings": list(m.warnings)
    }


def dump_model(model: SRModel, filename: TYPE_PATH):
    """
    Write a model file plus its metadata sidecar
    """
    Path(filename).write_bytes(encode_model(model))
    with openfile(sidecar_name(filename), "w", encoding="utf-8") as f:
        json.dump(model_metadata(model), f, indent=2)
        f.write("\n")


def load_model(filename: TYPE_PATH) -> SRModel:
    """
    Read a model file. The metadata sidecar is used if it exists
    """
    data = Path(filename).read_bytes()
    meta = None
    side = Path(sidecar_name(filename))
    if side.is_file():
        with openfile(str(side), encoding="utf-8") as f:
            try:
                meta = json.load(f)
            except json.JSONDecodeError as e:
                raise ModelFormatError("invalid model metadata in {}: {}", side, e) from e
    return decode_model(data, meta)
