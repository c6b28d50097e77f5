"""An i.i.d. sample stored as an ``(n, d)`` array."""
import numpy as np

from .errors import UnibwError


class Sample:
    """Read-only ``(n, d)`` array of observations.

    The points sorted along the first axis are cached because every windowed
    kernel sum starts with a binary search on that coordinate.
    """

    __slots__ = ("points", "_order")

    def __init__(self, points, dim=None):
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if dim in (None, 1) else pts.reshape(-1, dim)
        if pts.ndim != 2:
            raise UnibwError("sample must be a 1-d or 2-d array")
        if dim is not None and pts.shape[1] != dim:
            raise UnibwError(f"sample has {pts.shape[1]} coordinates, expected {dim}")
        if not np.all(np.isfinite(pts)):
            raise UnibwError("sample contains non-finite values")
        pts.setflags(write=False)
        self.points = pts
        self._order = None

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def sorted_points(self):
        """Points ordered by the first coordinate (stable)."""
        if self._order is None:
            order = np.argsort(self.points[:, 0], kind="stable")
            srt = np.ascontiguousarray(self.points[order])
            srt.setflags(write=False)
            self._order = srt
        return self._order

    def __eq__(self, other):
        return isinstance(other, Sample) and np.array_equal(self.points, other.points)

    def __repr__(self):
        return f"Sample(n={self.n}, d={self.dim})"


def as_sample(x, dim=None):
    if isinstance(x, Sample):
        if dim is not None and x.dim != dim:
            raise UnibwError(f"sample has {x.dim} coordinates, expected {dim}")
        return x
    return Sample(x, dim)
