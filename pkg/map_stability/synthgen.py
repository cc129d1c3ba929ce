"""
Synthetic map sequences with controlled instability.

Ground truth is generated from world-anchored template elements seen by
an ego vehicle following a scripted path; predictions are ground truth
copies degraded by the knobs of a :class:`PerturbationSpec`. Every knob
has a known effect on one stability dimension, which makes the metrics
checkable by construction.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from map_stability.geometry import PolyLine2D, RigidPose2D, PerceptionRange, clip_to_range
from map_stability.models import MapElement, FrameRecord, SequenceView
from map_stability.utils import InvalidGeometry, scene_rng

logger = logging.getLogger(__name__)

#: Seconds between consecutive frames
FRAME_PERIOD = 0.5

#: Lateral offsets (meters) of the template elements, ego lane centred at 0
DIVIDER_OFFSETS = (-5.25, -1.75, 1.75, 5.25)
BOUNDARY_OFFSETS = (-8.75, 8.75)

#: Clipped elements narrower than this along x (meters) are treated as out of view
MIN_VISIBLE_EXTENT = 0.5


@dataclass(frozen=True)
class StraightPath(object):
    """Constant heading along world +x at ``speed`` meters per frame"""
    speed: float = 1.0

    def pose(self, t):
        return RigidPose2D(x=self.speed * t, y=0.0, yaw=0.0)


@dataclass(frozen=True)
class ArcPath(object):
    """Left turn on a circle of ``radius`` centred at world (0, radius)"""
    radius: float = 100.0
    speed: float = 1.0

    def heading(self, t):
        return self.speed * t / self.radius

    def pose(self, t):
        phi = self.heading(t)
        return RigidPose2D(x=self.radius * math.sin(phi), y=self.radius * (1.0 - math.cos(phi)), yaw=phi)


@dataclass(frozen=True)
class TemplateElement(object):
    """A ground truth element anchored in world coordinates"""
    track_id: str
    class_label: str
    world: PolyLine2D


@dataclass(frozen=True)
class ScenarioSpec(object):
    length: int
    ego_path: object
    elements: tuple
    seed: int = 0
    scene_id: str = 'scene-0000'
    range: PerceptionRange = field(default_factory=PerceptionRange)

    def __post_init__(self):
        object.__setattr__(self, 'elements', tuple(self.elements))
        if self.length < 2:
            raise InvalidGeometry('A scenario needs at least 2 frames, got %d' % self.length)


@dataclass(frozen=True)
class PerturbationSpec(object):
    flicker_prob: float = 0.0
    jitter_sigma: float = 0.0
    jitter_mode: str = 'rigid'
    shape_noise: float = 0.0
    dropout_prob: float = 0.0
    score_base: float = 1.0
    flicker_score: float = 0.05
    lateral_bias: float = 0.0
    drift_sigma: float = 0.0
    drift_corr: float = 0.7
    classes: frozenset = None

    def __post_init__(self):
        for name in ('flicker_prob', 'dropout_prob', 'score_base', 'flicker_score', 'drift_corr'):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidGeometry('%s must lie in [0, 1]' % name)
        for name in ('jitter_sigma', 'shape_noise', 'drift_sigma'):
            if getattr(self, name) < 0:
                raise InvalidGeometry('%s must not be negative' % name)
        if self.jitter_mode not in ('rigid', 'vertex'):
            raise InvalidGeometry('jitter_mode must be rigid or vertex')
        if self.classes is not None:
            object.__setattr__(self, 'classes', frozenset(self.classes))

    def applies_to(self, class_label):
        return self.classes is None or class_label in self.classes


def line_points(start, stop, step):
    count = max(2, int(math.ceil((stop - start) / step)) + 1)
    return np.linspace(start, stop, count)


def ring_points(x0, x1, y0, y1, step):
    """
    A rectangle outline densified with the same x stations on its two long
    edges, so the ring monotonizes onto its centre line. The outline stops
    one station short of its start, leaving every column symmetric.
    """
    xs = line_points(x0, x1, step)
    ys = line_points(y0, y1, step)
    bottom = [(x, y0) for x in xs]
    right = [(x1, y) for y in ys[1:]]
    top = [(x, y1) for x in xs[::-1][1:]]
    left = [(x0, y) for y in ys[::-1][1:-1]]
    return bottom + right + top + left


def straight_templates(length, speed=1.0, crosswalk_every=40.0):
    """Dividers, boundaries and crosswalk rings along world +x"""
    start = -40.0
    stop = speed * length + 40.0
    xs = line_points(start, stop, 1.0)
    elements = []
    for i, offset in enumerate(DIVIDER_OFFSETS):
        elements.append(TemplateElement('divider-%d' % i, 'divider',
                                        PolyLine2D(np.column_stack([xs, np.full_like(xs, offset)]))))
    for i, offset in enumerate(BOUNDARY_OFFSETS):
        elements.append(TemplateElement('boundary-%d' % i, 'boundary',
                                        PolyLine2D(np.column_stack([xs, np.full_like(xs, offset)]))))
    if crosswalk_every:
        for i, centre in enumerate(np.arange(crosswalk_every / 2.0, stop, crosswalk_every)):
            ring = ring_points(centre - 2.0, centre + 2.0, BOUNDARY_OFFSETS[0], BOUNDARY_OFFSETS[1], 0.5)
            elements.append(TemplateElement('crosswalk-%d' % i, 'crosswalk', PolyLine2D(ring)))
    return elements


def arc_templates(length, path):
    """Dividers and boundaries concentric with an :class:`ArcPath`"""
    margin = 40.0 / path.radius
    elements = []
    labels = [('divider', DIVIDER_OFFSETS), ('boundary', BOUNDARY_OFFSETS)]
    for class_label, offsets in labels:
        for i, offset in enumerate(offsets):
            radius = path.radius - offset
            sweep = line_points(-margin, path.heading(length) + margin, 1.0 / radius)
            points = np.column_stack([radius * np.sin(sweep), path.radius - radius * np.cos(sweep)])
            elements.append(TemplateElement('%s-%d' % (class_label, i), class_label, PolyLine2D(points)))
    return elements


def straight_scenario(length=50, speed=1.0, seed=0, scene_id='scene-0000', crosswalks=True):
    return ScenarioSpec(length=length, ego_path=StraightPath(speed=speed),
                        elements=straight_templates(length, speed, 40.0 if crosswalks else 0),
                        seed=seed, scene_id=scene_id)


def arc_scenario(length=50, radius=100.0, speed=1.0, seed=0, scene_id='scene-0000'):
    path = ArcPath(radius=radius, speed=speed)
    return ScenarioSpec(length=length, ego_path=path, elements=arc_templates(length, path),
                        seed=seed, scene_id=scene_id)


def generate_gt(spec):
    """
    Ground truth sequence of a scenario: the ego pose advances along the
    path and every template is moved into the ego frame and clipped to the
    perception range; slivers narrower than ``MIN_VISIBLE_EXTENT`` along x
    are left out. Prediction lists are empty.
    """
    frames = []
    for t in range(spec.length):
        pose = spec.ego_path.pose(t)
        ground_truth = []
        for template in spec.elements:
            local = clip_to_range(PolyLine2D(pose.apply_inverse(template.world.coords)), spec.range)
            if local is None or np.ptp(local.coords[:, 0]) < MIN_VISIBLE_EXTENT:
                continue
            ground_truth.append(MapElement(element_id=template.track_id, class_label=template.class_label,
                                           geometry=local, gt_track_id=template.track_id))
        frames.append(FrameRecord(scene_id=spec.scene_id, frame_index=t, timestamp=t * FRAME_PERIOD,
                                  ego_pose=pose, ground_truth=ground_truth))
    logger.debug('Generated %d frames for scene %s', len(frames), spec.scene_id)
    return SequenceView(scene_id=spec.scene_id, frames=frames)


def bend(coords, angle):
    """
    Kink the polyline at its middle vertex: the vertex moves sideways so
    that the turning angle at it equals ``angle``.
    """
    if len(coords) < 3 or angle == 0.0:
        return coords
    m = len(coords) // 2
    before = np.hypot(*(coords[m] - coords[m - 1]))
    after = np.hypot(*(coords[m + 1] - coords[m]))
    chord = coords[m + 1] - coords[m - 1]
    norm = np.hypot(*chord)
    if norm == 0.0:
        return coords
    normal = np.array([-chord[1], chord[0]]) / norm
    coords = coords.copy()
    coords[m] = coords[m] + normal * min(before, after) * math.tan(angle / 2.0)
    return coords


class Perturber(object):
    """
    Derives predictions for one scene. Random draws are made in a fixed
    order for every element of every frame, whatever the knob values, so
    switching one knob off leaves the other knobs' draws untouched.
    """

    def __init__(self, pert, rng):
        self.pert = pert
        self.rng = rng
        self.drift = {}

    def get_drift(self, track_id, draw):
        pert = self.pert
        if track_id not in self.drift:
            self.drift[track_id] = pert.drift_sigma * draw
        else:
            self.drift[track_id] = (pert.drift_corr * self.drift[track_id] +
                                    math.sqrt(1.0 - pert.drift_corr ** 2) * pert.drift_sigma * draw)
        return self.drift[track_id]

    def perturb_element(self, frame, position, element):
        pert = self.pert
        rng = self.rng
        drop, flick, sign, magnitude = rng.random(4)
        vertex_noise = rng.standard_normal(len(element.geometry))
        rigid = rng.standard_normal()
        drift = self.get_drift(element.gt_track_id, rng.standard_normal())
        if not pert.applies_to(element.class_label):
            return self.copy_element(frame, position, element, element.geometry.coords, pert.score_base)
        if drop < pert.dropout_prob:
            return None
        coords = np.array(element.geometry.coords)
        if pert.jitter_mode == 'vertex':
            offsets = pert.jitter_sigma * vertex_noise
        else:
            offsets = np.full(len(coords), pert.jitter_sigma * rigid)
        coords[:, 1] += offsets + pert.lateral_bias + drift
        angle = (1.0 if sign < 0.5 else -1.0) * magnitude * pert.shape_noise
        coords = bend(coords, angle)
        score = pert.flicker_score if flick < pert.flicker_prob else pert.score_base
        return self.copy_element(frame, position, element, coords, score)

    def copy_element(self, frame, position, element, coords, score):
        return MapElement(element_id='%d:%d' % (frame.frame_index, position), class_label=element.class_label,
                          geometry=PolyLine2D(coords), score=score)

    def perturb_frame(self, frame):
        predictions = []
        for element in frame.ground_truth:
            prediction = self.perturb_element(frame, len(predictions), element)
            if prediction is not None:
                predictions.append(prediction)
        return frame.replace(predictions=predictions)


def perturb(gt_seq, pert, seed):
    """
    Returns ``gt_seq`` with predictions derived from its ground truth.
    Predictions carry no track id: matching has to rediscover identity.
    """
    perturber = Perturber(pert, scene_rng(seed, gt_seq.scene_id, 'perturbation'))
    return SequenceView(scene_id=gt_seq.scene_id, frames=[perturber.perturb_frame(f) for f in gt_seq.frames])


def generate_corpus(scenario_factory, pert, scenes, seed=0, **kwargs):
    """``scenes`` perturbed sequences built by ``scenario_factory``"""
    sequences = []
    for i in range(scenes):
        spec = scenario_factory(seed=seed, scene_id='scene-%04d' % i, **kwargs)
        sequences.append(perturb(generate_gt(spec), pert, seed))
    return sequences
