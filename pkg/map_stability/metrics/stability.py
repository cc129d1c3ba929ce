"""
Presence, localization and shape stability of matched instances, their
combination and the class-level aggregation into mAS.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from map_stability.geometry import transform_polyline, clip_to_range, resample_pair, curvature
from map_stability.utils import exact_mean

FLICKER_PRESENCE = 0.5


def presence(score_t, score_tk, tau):
    """
    1.0 when both scores sit on the same side of ``tau``, 0.5 otherwise.
    A missing score counts as 0.
    """
    above_t = (score_t or 0.0) >= tau
    above_tk = (score_tk or 0.0) >= tau
    return 1.0 if above_t == above_tk else FLICKER_PRESENCE


def loc_stability(pair, beta, loc_map='linear'):
    """
    Map the mean absolute lateral deviation ``d`` of a resampled pair to a
    score: ``1 - d / beta`` clamped to [0, 1], or ``exp(-2 d ln2 / beta)``
    for the exponential map.
    """
    deviation = float(np.mean(np.abs(pair.y_current - pair.y_history)))
    if loc_map == 'exp':
        return math.exp(-deviation * math.log(2.0) * 2.0 / beta)
    return min(1.0, max(0.0, 1.0 - deviation / beta))


def shape_stability(pair):
    """``1 - |k_current - k_history| / pi``, or ``None`` below 3 samples"""
    if len(pair) < 3:
        return None
    difference = abs(curvature(pair.current_points()) - curvature(pair.history_points()))
    return min(1.0, max(0.0, 1.0 - difference / math.pi))


@dataclass(frozen=True)
class InstanceStability(object):
    gt_track_id: str
    class_label: str
    presence: float
    loc: float
    shape: float
    stability: float
    one_sided: bool = False


def combine(presence_value, loc, shape, omega):
    """``presence * (omega * loc + (1 - omega) * shape)``; absent terms count as 0"""
    return presence_value * (omega * (loc or 0.0) + (1.0 - omega) * (shape or 0.0))


def align(pair, config):
    """
    Move the history polyline into the current ego frame, clip it to the
    perception range and resample both on their common x-range. Returns
    ``None`` when nothing comparable is left.
    """
    history = transform_polyline(pair.poly_history, pair.pose_history, pair.pose_current)
    history = clip_to_range(history, config.range)
    if history is None:
        return None
    return resample_pair(pair.poly_current, history, config.n_samples)


def instance_stability(pair, config):
    presence_value = presence(pair.score_history, pair.score_current, config.tau)
    resampled = align(pair, config)
    if resampled is None:
        loc = shape = 0.0
    else:
        loc = loc_stability(resampled, config.beta, config.loc_map)
        shape = shape_stability(resampled)
    return InstanceStability(
        gt_track_id=pair.gt_track_id,
        class_label=pair.class_label,
        presence=presence_value,
        loc=loc,
        shape=shape,
        stability=combine(presence_value, loc, shape, config.omega),
    )


def one_sided_stability(one_sided, config):
    """A flicker-degraded instance: presence 0.5, no geometric contribution"""
    return InstanceStability(
        gt_track_id=one_sided.gt_track_id,
        class_label=one_sided.class_label,
        presence=FLICKER_PRESENCE,
        loc=None,
        shape=None,
        stability=0.0,
        one_sided=True,
    )


@dataclass(frozen=True)
class ClassSummary(object):
    presence_mean: float
    loc_mean: float
    shape_mean: float
    stability_mean: float
    instance_count: int
    one_sided_count: int = 0
    matched_only_stability_mean: float = None

    def as_dict(self):
        return {
            'presence': self.presence_mean,
            'loc': self.loc_mean,
            'shape': self.shape_mean,
            'stability': self.stability_mean,
            'instance_count': self.instance_count,
            'one_sided_count': self.one_sided_count,
            'stability_matched_only': self.matched_only_stability_mean,
        }


@dataclass(frozen=True)
class StabilityReport(object):
    per_class: dict = field(default_factory=dict)
    mas: float = None
    mas_matched_only: float = None
    pair_count: int = 0
    skipped_scene_count: int = 0
    config_echo: object = None

    @property
    def instance_count(self):
        return sum(summary.instance_count for summary in self.per_class.values())

    def overall(self, attribute):
        """Unweighted class mean of one per-class attribute"""
        return exact_mean(getattr(summary, attribute) for summary in self.per_class.values()
                          if summary.instance_count and getattr(summary, attribute) is not None)


def summarize(instances):
    two_sided = [i for i in instances if not i.one_sided]
    return ClassSummary(
        presence_mean=exact_mean(i.presence for i in instances),
        loc_mean=exact_mean(i.loc for i in instances if i.loc is not None),
        shape_mean=exact_mean(i.shape for i in instances if i.shape is not None),
        stability_mean=exact_mean(i.stability for i in instances),
        instance_count=len(instances),
        one_sided_count=len(instances) - len(two_sided),
        matched_only_stability_mean=exact_mean(i.stability for i in two_sided),
    )


def aggregate(instances, pair_count=0, skipped_scene_count=0, config=None):
    """
    Class means of the instance records, and mAS as the unweighted mean of
    the class stabilities. The result does not depend on the order of
    ``instances``.
    """
    by_class = {}
    for instance in instances:
        by_class.setdefault(instance.class_label, []).append(instance)
    per_class = dict((label, summarize(by_class[label])) for label in sorted(by_class))
    return StabilityReport(
        per_class=per_class,
        mas=exact_mean(s.stability_mean for s in per_class.values()),
        mas_matched_only=exact_mean(s.matched_only_stability_mean for s in per_class.values()
                                    if s.matched_only_stability_mean is not None),
        pair_count=pair_count,
        skipped_scene_count=skipped_scene_count,
        config_echo=config,
    )
