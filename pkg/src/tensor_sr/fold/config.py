"""
Folding configuration
"""

from dataclasses import dataclass

from typing import Tuple, List

from ..helper.exception import ConfigError

TYPE_SHIFT = Tuple[int, int]

# Shift set for r=7; further shifts are taken ring by ring around the origin
BASE_SHIFTS = ((0, 0), (1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, -1),
               (1, -1), (-1, 1))

# Identifier of the 6-filter low-resolution feature set
FILTER_SET_DERIVATIVES = 0


def default_shifts(r: int) -> Tuple[TYPE_SHIFT, ...]:
    """
    A deterministic list of r distinct (dx, dy) pixel shifts, starting at (0,0)
    """
    shifts: List[TYPE_SHIFT] = list(BASE_SHIFTS[:r])
    ring = 2
    while len(shifts) < r:
        for dx in range(-ring, ring + 1):
            for dy in range(-ring, ring + 1):
                if max(abs(dx), abs(dy)) == ring and len(shifts) < r:
                    shifts.append((dx, dy))
        ring += 1
    return tuple(shifts)


@dataclass(frozen=True)
class FoldConfig:
    """
    Parameters of the image <-> tensor block transformation
      :param a: cube edge, in pixels
      :param r: number of shifted copies of each image
      :param c: downsampling rate
      :param shifts: r (dx, dy) offsets; dx moves columns, dy moves rows
      :param sample_budget: maximum number of cubes (0 = all of them)
      :param seed: seed for the random selection of cubes
    """
    a: int = 4
    r: int = 7
    c: int = 2
    shifts: Tuple[TYPE_SHIFT, ...] = None
    sample_budget: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.a < 2:
            raise ConfigError("invalid fold configuration: a >= 2 (got {})", self.a)
        if self.r < self.a:
            raise ConfigError("invalid fold configuration: r >= a (got r={}, a={})",
                              self.r, self.a)
        if self.c < 2:
            raise ConfigError("invalid fold configuration: c >= 2 (got {})", self.c)
        if self.sample_budget < 0:
            raise ConfigError("invalid fold configuration: N >= 0 (got {})",
                              self.sample_budget)
        if self.shifts is None:
            object.__setattr__(self, "shifts", default_shifts(self.r))
        shifts = tuple((int(dx), int(dy)) for dx, dy in self.shifts)
        object.__setattr__(self, "shifts", shifts)
        if len(shifts) != self.r:
            raise ConfigError("invalid fold configuration: {} shifts for r={}",
                              len(shifts), self.r)
        if shifts[0] != (0, 0):
            raise ConfigError("invalid fold configuration: first shift must be (0, 0)")
        if len(set(shifts)) != len(shifts):
            raise ConfigError("invalid fold configuration: repeated shifts")
        if any(not -128 <= v <= 127 for s in shifts for v in s):
            raise ConfigError("invalid fold configuration: shifts must fit in 8 bits")

    @property
    def d(self) -> int:
        """Rows of a high-resolution block"""
        return self.a * self.a

    @property
    def d_low(self) -> int:
        """Rows of a low-resolution feature block"""
        return 6 * self.d

    @property
    def n(self) -> int:
        """Tube length of a block"""
        return self.a
