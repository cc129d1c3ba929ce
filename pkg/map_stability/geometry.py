"""
Polyline and rigid pose primitives.

Every map element is carried as an ordered 2D point sequence in the ego
frame of the frame that observed it. The functions here move polylines
between ego frames, clip them to the perception window, resample matched
pairs on a shared x grid and measure their mean turning angle.
"""
import math
from dataclasses import dataclass

import numpy as np

from map_stability.utils import InvalidGeometry, DegeneratePolyline

#: Minimum segment length of a valid polyline (meters)
MIN_SEGMENT_LENGTH = 1e-9

#: Points closer than this along x are merged when monotonizing (meters)
MONOTONE_TOLERANCE = 1e-9

#: Common x-ranges narrower than this are not comparable (meters)
MIN_COMMON_WIDTH = 1e-6


def wrap_angle(theta):
    """Wrap an angle into (-pi, pi]"""
    wrapped = math.atan2(math.sin(theta), math.cos(theta))
    if wrapped == -math.pi:
        return math.pi
    return wrapped


@dataclass(frozen=True)
class Point2D(object):
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidGeometry('Point coordinates must be finite, got (%r, %r)' % (self.x, self.y))


class PolyLine2D(object):
    """
    An ordered sequence of at least two points, in meters.

    The coordinates are held in a read-only ``(n, 2)`` array so a polyline
    can be shared freely between threads and processes.
    """
    __slots__ = ('_coords',)

    def __init__(self, points):
        coords = np.array(points, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise InvalidGeometry('Expected a sequence of (x, y) points, got shape %s' % (coords.shape,))
        if len(coords) < 2:
            raise InvalidGeometry('A polyline needs at least 2 points, got %d' % len(coords))
        if not np.all(np.isfinite(coords)):
            raise InvalidGeometry('Polyline coordinates must be finite')
        lengths = np.hypot(*np.diff(coords, axis=0).T)
        if np.any(lengths <= MIN_SEGMENT_LENGTH):
            index = int(np.argmax(lengths <= MIN_SEGMENT_LENGTH))
            raise InvalidGeometry('Consecutive duplicate points at index %d' % index)
        coords.setflags(write=False)
        self._coords = coords

    @property
    def coords(self):
        return self._coords

    @property
    def points(self):
        return [Point2D(float(x), float(y)) for x, y in self._coords]

    @property
    def length(self):
        return float(np.sum(np.hypot(*np.diff(self._coords, axis=0).T)))

    def __len__(self):
        return len(self._coords)

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other):
        if not isinstance(other, PolyLine2D):
            return NotImplemented
        return np.array_equal(self._coords, other._coords)

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash(self._coords.tobytes())

    def __repr__(self):
        return '<PolyLine2D: %d points>' % len(self)

    def allclose(self, other, atol=1e-9):
        return self._coords.shape == other.coords.shape and np.allclose(self._coords, other.coords, rtol=0, atol=atol)


@dataclass(frozen=True)
class RigidPose2D(object):
    """
    The ego -> world transform of one frame (planar SE(2)).

    ``apply`` maps ego coordinates to world coordinates, ``apply_inverse``
    maps world coordinates back into this ego frame.
    """
    x: float
    y: float
    yaw: float

    def __post_init__(self):
        for name in ('x', 'y', 'yaw'):
            if not math.isfinite(getattr(self, name)):
                raise InvalidGeometry('Pose %s must be finite' % name)
        object.__setattr__(self, 'yaw', wrap_angle(self.yaw))

    def rotation(self):
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return np.array([[c, -s], [s, c]])

    def matrix(self):
        """Homogeneous 3x3 matrix of the ego -> world transform"""
        m = np.eye(3)
        m[:2, :2] = self.rotation()
        m[:2, 2] = (self.x, self.y)
        return m

    def apply(self, coords):
        coords = np.asarray(coords, dtype=np.float64)
        return coords @ self.rotation().T + np.array([self.x, self.y])

    def apply_inverse(self, coords):
        coords = np.asarray(coords, dtype=np.float64)
        return (coords - np.array([self.x, self.y])) @ self.rotation()

    def inverse(self):
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return RigidPose2D(x=-(c * self.x + s * self.y), y=-(-s * self.x + c * self.y), yaw=-self.yaw)

    def compose(self, other):
        """Returns ``self * other``: apply ``other`` first, then ``self``"""
        x, y = self.apply([other.x, other.y])
        return RigidPose2D(x=float(x), y=float(y), yaw=self.yaw + other.yaw)


@dataclass(frozen=True)
class PerceptionRange(object):
    x_min: float = -15.0
    x_max: float = 15.0
    y_min: float = -30.0
    y_max: float = 30.0

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidGeometry('Perception range needs x_min < x_max and y_min < y_max, got %r' % (self,))

    def contains(self, coords):
        """Boolean mask of the points inside the (closed) window"""
        coords = np.asarray(coords, dtype=np.float64)
        return ((coords[:, 0] >= self.x_min) & (coords[:, 0] <= self.x_max) &
                (coords[:, 1] >= self.y_min) & (coords[:, 1] <= self.y_max))


class ResampledPair(object):
    """
    Two polylines sampled at the same ``N`` equally spaced abscissae.

    ``y_current`` belongs to the later frame, ``y_history`` to the earlier
    frame after it was moved into the later frame's ego coordinates.
    """
    __slots__ = ('xs', 'y_current', 'y_history')

    def __init__(self, xs, y_current, y_history):
        xs = np.asarray(xs, dtype=np.float64)
        y_current = np.asarray(y_current, dtype=np.float64)
        y_history = np.asarray(y_history, dtype=np.float64)
        if not (len(xs) == len(y_current) == len(y_history)):
            raise InvalidGeometry('Resampled rows must have identical lengths')
        if len(xs) < 2:
            raise InvalidGeometry('A resampled pair needs at least 2 samples')
        if np.any(np.diff(xs) <= 0):
            raise InvalidGeometry('Sample abscissae must be strictly increasing')
        for array in (xs, y_current, y_history):
            array.setflags(write=False)
        self.xs = xs
        self.y_current = y_current
        self.y_history = y_history

    def __len__(self):
        return len(self.xs)

    def current_points(self):
        return np.column_stack([self.xs, self.y_current])

    def history_points(self):
        return np.column_stack([self.xs, self.y_history])


def transform_polyline(poly, from_pose, to_pose):
    """
    Move ``poly`` from the ego frame of ``from_pose`` into the ego frame
    of ``to_pose`` (ego -> world -> ego). Point order is preserved.
    """
    if from_pose == to_pose:
        return poly
    world = from_pose.apply(poly.coords)
    return PolyLine2D(to_pose.apply_inverse(world))


def clip_to_range(poly, perception_range):
    """
    Keep the points inside ``perception_range`` (point retention, no
    segment intersection). Returns ``None`` when fewer than two points
    survive.
    """
    kept = poly.coords[perception_range.contains(poly.coords)]
    if len(kept) == len(poly):
        return poly
    if len(kept) > 1:
        # Cutting a ring outline can leave two equal points side by side.
        steps = np.hypot(*np.diff(kept, axis=0).T)
        kept = kept[np.concatenate([[True], steps > MIN_SEGMENT_LENGTH])]
    if len(kept) < 2:
        return None
    return PolyLine2D(kept)


def monotonize(coords, tolerance=MONOTONE_TOLERANCE):
    """
    Returns ``(xs, ys)`` with ``xs`` strictly increasing: points are sorted
    by x and points sharing an x (within ``tolerance``) are averaged.
    """
    coords = np.asarray(coords, dtype=np.float64)
    order = np.argsort(coords[:, 0], kind='stable')
    xs = coords[order, 0]
    ys = coords[order, 1]
    starts = np.concatenate([[0], np.flatnonzero(np.diff(xs) > tolerance) + 1])
    counts = np.diff(np.append(starts, len(xs)))
    return np.add.reduceat(xs, starts) / counts, np.add.reduceat(ys, starts) / counts


def resample_pair(current, history, n):
    """
    Sample both polylines at ``n`` equally spaced abscissae spanning their
    common x-range, interpolating y piecewise linearly.

    Returns ``None`` when the common x-range is narrower than
    ``MIN_COMMON_WIDTH``.
    """
    if n < 2:
        raise InvalidGeometry('At least 2 samples are required, got %d' % n)
    xc, yc = monotonize(current.coords)
    xh, yh = monotonize(history.coords)
    lower = max(xc[0], xh[0])
    upper = min(xc[-1], xh[-1])
    if upper - lower < MIN_COMMON_WIDTH:
        return None
    xs = lower + np.arange(n) * ((upper - lower) / (n - 1))
    return ResampledPair(xs, np.interp(xs, xc, yc), np.interp(xs, xh, yh))


def curvature(points):
    """
    Mean turning angle (radians, in [0, pi]) between consecutive segments
    of an ordered point list, averaged over its ``len(points) - 2``
    interior vertices.
    """
    coords = np.asarray(points, dtype=np.float64)
    if len(coords) < 3:
        raise DegeneratePolyline('degenerate polyline: curvature needs at least 3 points, got %d' % len(coords))
    segments = np.diff(coords, axis=0)
    if np.any(np.hypot(segments[:, 0], segments[:, 1]) <= MIN_SEGMENT_LENGTH):
        raise DegeneratePolyline('degenerate segment: zero-length segment in curvature input')
    before, after = segments[:-1], segments[1:]
    cross = before[:, 0] * after[:, 1] - before[:, 1] * after[:, 0]
    dot = np.einsum('ij,ij->i', before, after)
    # atan2 of |cross| and dot equals arccos of the normalised dot product
    return float(np.mean(np.arctan2(np.abs(cross), dot)))


def densify(poly, resolution):
    """``resolution`` points equally spaced along the arc length of ``poly``"""
    coords = poly.coords
    steps = np.hypot(*np.diff(coords, axis=0).T)
    distance = np.concatenate([[0.0], np.cumsum(steps)])
    targets = np.linspace(0.0, distance[-1], resolution)
    return np.column_stack([np.interp(targets, distance, coords[:, 0]),
                            np.interp(targets, distance, coords[:, 1])])
