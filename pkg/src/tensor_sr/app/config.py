"""
Command-line configuration: a flat file of "key = value" lines, with "#"
comments
"""

from dataclasses import dataclass, fields
from pathlib import Path

from typing import Dict, Sequence, Union

from pii_data.helper.io import openfile

from ..helper.exception import ConfigError
from ..helper.threads import ENV_THREADS
from ..fold import FoldConfig
from ..sparse import SparseCodeConfig
from ..sparse.fista import LIPSCHITZ_STRATEGIES, MONOTONE_STRATEGIES
from ..api import TrainSpec

# key -> (attribute, type, description)
KEYS = {
    "a": ("a", int, "cube edge in pixels"),
    "r": ("r", int, "number of shifted copies of each image"),
    "c": ("c", int, "downsampling rate"),
    "m": ("m", int, "number of dictionary atoms"),
    "n": ("n", int, "tube length of the dictionaries (must equal a)"),
    "lambda": ("lam", float, "sparsity weight"),
    "T": ("T", int, "training iterations"),
    "S": ("S", int, "FISTA iterations per sparse coding step"),
    "N": ("N", int, "number of training cubes (0 = all)"),
    "seed": ("seed", int, "seed for all random choices"),
    "tol": ("tol", float, "FISTA relative tolerance"),
    "eta": ("eta", float, "Lipschitz safety factor"),
    "lipschitz": ("lipschitz", str, "Lipschitz constant: " + " or ".join(LIPSCHITZ_STRATEGIES)),
    "monotone": ("monotone", str, "FISTA non-descent handling: " + " or ".join(MONOTONE_STRATEGIES)),
}


@dataclass(frozen=True)
class CliConfig:
    a: int = 4
    r: int = 7
    c: int = 2
    m: int = 128
    n: int = 4
    lam: float = 0.05
    T: int = 10
    S: int = 50
    N: int = 10000
    seed: int = 0
    tol: float = 1e-7
    eta: float = 1.0
    lipschitz: str = "spectral"
    monotone: str = "mfista"

    def __post_init__(self):
        # build the module configurations, so that they check their invariants
        self.fold_config()
        self.sparse_config()
        if self.n != self.a:
            raise ConfigError("invalid configuration: n == a (got n={}, a={})",
                              self.n, self.a)
        if self.m < 1:
            raise ConfigError("invalid configuration: m >= 1 (got {})", self.m)
        if self.T < 0:
            raise ConfigError("invalid configuration: T >= 0 (got {})", self.T)
        if self.seed < 0:
            raise ConfigError("invalid configuration: seed >= 0 (got {})", self.seed)

    def fold_config(self) -> FoldConfig:
        return FoldConfig(a=self.a, r=self.r, c=self.c, sample_budget=self.N,
                          seed=self.seed)

    def sparse_config(self) -> SparseCodeConfig:
        return SparseCodeConfig(lam=self.lam, max_iter=self.S, tol=self.tol,
                                lipschitz=self.lipschitz, eta=self.eta,
                                monotone=self.monotone)

    def train_spec(self, images: Sequence, out: Union[str, Path] = None) -> TrainSpec:
        return TrainSpec(images=tuple(images), fold=self.fold_config(),
                         sparse=self.sparse_config(), atoms=self.m,
                         outer_iter=self.T, seed=self.seed, out=out)


def _convert(key: str, value: str, lineno: int):
    _, typ, _ = KEYS[key]
    try:
        return typ(value)
    except ValueError:
        raise ConfigError("line {}: invalid value for '{}': {}", lineno, key, value)


def parse_config(text: str) -> CliConfig:
    """
    Parse the contents of a configuration file
    """
    values: Dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("line {}: expected 'key = value', got: {}", lineno, line)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError("line {}: unknown configuration key '{}'", lineno, key)
        attr = KEYS[key][0]
        if attr in values:
            raise ConfigError("line {}: duplicate configuration key '{}'", lineno, key)
        values[attr] = _convert(key, value, lineno)
    return CliConfig(**values)


def load_config(filename: Union[str, Path]) -> CliConfig:
    if not Path(filename).is_file():
        raise FileNotFoundError("config file not found: {}".format(filename))
    with openfile(str(filename), encoding="utf-8") as f:
        return parse_config(f.read())


def config_help() -> str:
    """
    The list of configuration keys with their defaults, for --help
    """
    defaults = {f.name: f.default for f in fields(CliConfig)}
    lines = ["configuration keys (key = value):"]
    for key, (attr, _, desc) in KEYS.items():
        lines.append("  {:<10} {} (default: {})".format(key, desc, defaults[attr]))
    lines += ["", "environment:",
              "  {:<10} FFT worker threads (0 = all CPUs); BLAS/LAPACK threads are"
              " set by the BLAS library variables".format(ENV_THREADS)]
    return "\n".join(lines)
