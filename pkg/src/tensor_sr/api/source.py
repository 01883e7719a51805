"""
Providers of low-resolution images for the generation phase
"""

from abc import ABC, abstractmethod
from pathlib import Path

from typing import Iterator, List, Tuple, Union

from ..helper.exception import ConfigError, GeometryError
from ..image import GrayImage
from ..image.gray import FORMATS

TYPE_PATH = Union[str, Path]
TYPE_SHAPE = Tuple[int, int]


def image_files(directory: TYPE_PATH) -> List[Path]:
    """
    The PNG and PGM files in a directory, sorted by name
    """
    path = Path(directory)
    if not path.is_dir():
        raise FileNotFoundError("not a directory: {}".format(directory))
    files = sorted(f for f in path.iterdir()
                   if f.is_file() and f.suffix.lower() in FORMATS)
    if not files:
        raise ConfigError("no PNG/PGM images found in: {}", directory)
    return files


class LowResSource(ABC):
    """
    A source of named low-resolution images. If an expected shape is
    defined, every image must have it
    """

    def __init__(self, shape: TYPE_SHAPE = None):
        self.shape = tuple(shape) if shape else None

    def check(self, name: str, img: GrayImage) -> GrayImage:
        if self.shape and img.shape != self.shape:
            raise GeometryError("image {}: expected {}x{}, got {}x{}", name,
                                *self.shape, *img.shape)
        return img

    @abstractmethod
    def __iter__(self) -> Iterator[Tuple[str, GrayImage]]:
        """
        Deliver (name, image) pairs
        """


class DirectorySource(LowResSource):
    """
    Read low-resolution images from the PNG/PGM files in a directory
    """

    def __init__(self, directory: TYPE_PATH, shape: TYPE_SHAPE = None):
        super().__init__(shape)
        self.files = image_files(directory)

    def __len__(self) -> int:
        return len(self.files)

    def __iter__(self) -> Iterator[Tuple[str, GrayImage]]:
        for f in self.files:
            yield f.name, self.check(f.name, GrayImage.load(f))
