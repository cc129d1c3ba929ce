"""
Map elements, frames and scene sequences.
"""
import math
from dataclasses import dataclass, field

from map_stability.geometry import PolyLine2D, RigidPose2D
from map_stability.utils import InvalidGeometry


@dataclass(frozen=True)
class MapElement(object):
    """
    One vectorized map element.

    Predictions carry a ``score`` and no ``gt_track_id``; ground truth
    carries a ``gt_track_id`` (stable across the frames of a scene) and
    no ``score``.
    """
    element_id: str
    class_label: str
    geometry: PolyLine2D
    score: float = None
    gt_track_id: str = None

    def __post_init__(self):
        if not isinstance(self.geometry, PolyLine2D):
            object.__setattr__(self, 'geometry', PolyLine2D(self.geometry))
        if (self.score is None) == (self.gt_track_id is None):
            raise InvalidGeometry('Element %r must carry either a score (prediction) '
                                  'or a gt_track_id (ground truth), not both or neither' % self.element_id)
        if self.score is not None:
            if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
                raise InvalidGeometry('Element %r has score %r outside [0, 1]' % (self.element_id, self.score))

    @property
    def is_prediction(self):
        return self.score is not None

    @classmethod
    def prediction(cls, element_id, class_label, points, score):
        return cls(element_id=str(element_id), class_label=class_label, geometry=PolyLine2D(points), score=float(score))

    @classmethod
    def ground_truth(cls, track_id, class_label, points):
        return cls(element_id=str(track_id), class_label=class_label, geometry=PolyLine2D(points),
                   gt_track_id=str(track_id))


@dataclass(frozen=True)
class FrameRecord(object):
    """One timestamped observation: ego pose, predictions and ground truth"""
    scene_id: str
    frame_index: int
    timestamp: float
    ego_pose: RigidPose2D
    predictions: tuple = field(default=())
    ground_truth: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, 'predictions', tuple(self.predictions))
        object.__setattr__(self, 'ground_truth', tuple(self.ground_truth))
        for element in self.predictions:
            if not element.is_prediction:
                raise InvalidGeometry('Frame %d lists ground truth %r among its predictions'
                                      % (self.frame_index, element.element_id))
        for element in self.ground_truth:
            if element.is_prediction:
                raise InvalidGeometry('Frame %d lists prediction %r among its ground truth'
                                      % (self.frame_index, element.element_id))
        prediction_ids = [element.element_id for element in self.predictions]
        if len(set(prediction_ids)) != len(prediction_ids):
            raise InvalidGeometry('Frame %d repeats a prediction id' % self.frame_index)
        track_ids = [element.gt_track_id for element in self.ground_truth]
        if len(set(track_ids)) != len(track_ids):
            raise InvalidGeometry('Frame %d repeats a ground truth track id' % self.frame_index)

    def get_prediction(self, element_id):
        for element in self.predictions:
            if element.element_id == element_id:
                return element
        raise KeyError(element_id)

    def get_ground_truth(self, track_id):
        for element in self.ground_truth:
            if element.gt_track_id == track_id:
                return element
        raise KeyError(track_id)

    def track_ids(self):
        return set(element.gt_track_id for element in self.ground_truth)

    def replace(self, **changes):
        values = dict(scene_id=self.scene_id, frame_index=self.frame_index, timestamp=self.timestamp,
                      ego_pose=self.ego_pose, predictions=self.predictions, ground_truth=self.ground_truth)
        values.update(changes)
        return FrameRecord(**values)


@dataclass(frozen=True)
class SequenceView(object):
    """The ordered frames of one scene"""
    scene_id: str
    frames: tuple

    def __post_init__(self):
        object.__setattr__(self, 'frames', tuple(self.frames))
        for previous, frame in zip(self.frames, self.frames[1:]):
            if frame.timestamp <= previous.timestamp:
                raise InvalidGeometry('Scene %r frames are not strictly ordered by timestamp (frame %d)'
                                      % (self.scene_id, frame.frame_index))
        for frame in self.frames:
            if frame.scene_id != self.scene_id:
                raise InvalidGeometry('Frame %d belongs to scene %r, not %r'
                                      % (frame.frame_index, frame.scene_id, self.scene_id))

    def __len__(self):
        return len(self.frames)

    def __getitem__(self, index):
        return self.frames[index]

    def __iter__(self):
        return iter(self.frames)
