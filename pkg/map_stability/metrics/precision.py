"""
Chamfer-distance average precision of single frames.

Predictions of one class are ranked by descending score across all
frames and greedily matched, within their own frame, to the nearest
unmatched ground truth inside the distance threshold.
"""
from dataclasses import dataclass, field

import numpy as np

from map_stability.matching import chamfer_cost
from map_stability.utils import exact_mean

#: Recall grid of the 101-point interpolation
RECALL_GRID = np.arange(101) / 100.0


@dataclass(frozen=True)
class PrecisionReport(object):
    per_class: dict = field(default_factory=dict)
    per_threshold: dict = field(default_factory=dict)
    thresholds: tuple = ()
    map: float = None

    def as_dict(self):
        return {
            'thresholds': list(self.thresholds),
            'per_class': dict(self.per_class),
            'per_threshold': dict((label, dict(('%g' % t, ap) for t, ap in aps.items()))
                                  for label, aps in self.per_threshold.items()),
            'map': self.map,
        }


def interpolated_ap(true_positive, gt_count):
    """
    Area under the interpolated precision envelope, sampled on the
    101-point recall grid and summed over the 100 recall steps.
    """
    if gt_count == 0 or len(true_positive) == 0:
        return 0.0
    hits = np.cumsum(true_positive)
    recall = hits / float(gt_count)
    precision = hits / np.arange(1, len(hits) + 1, dtype=np.float64)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    positions = np.searchsorted(recall, RECALL_GRID[1:] - 1e-12, side='left')
    sampled = np.where(positions < len(envelope), envelope[np.minimum(positions, len(envelope) - 1)], 0.0)
    return float(np.sum(sampled) / 100.0)


def frame_costs(frame, class_label, resolution):
    """Chamfer cost matrix (predictions x ground truth) of one class in one frame"""
    predictions = [p for p in frame.predictions if p.class_label == class_label]
    ground_truth = [g for g in frame.ground_truth if g.class_label == class_label]
    costs = np.empty((len(predictions), len(ground_truth)))
    for i, pred in enumerate(predictions):
        for j, gt in enumerate(ground_truth):
            costs[i, j] = chamfer_cost(pred.geometry, gt.geometry, resolution)
    return predictions, ground_truth, costs


def class_ap(frames, class_label, thresholds, resolution):
    """Returns ``{threshold: ap}`` for one class, or ``None`` without ground truth"""
    ranked = []
    costs_by_frame = []
    gt_count = 0
    for position, frame in enumerate(frames):
        predictions, ground_truth, costs = frame_costs(frame, class_label, resolution)
        costs_by_frame.append(costs)
        gt_count += len(ground_truth)
        for row, pred in enumerate(predictions):
            ranked.append((-pred.score, position, row))
    if gt_count == 0:
        return None
    ranked.sort()
    result = {}
    for threshold in thresholds:
        taken = [np.zeros(costs.shape[1], dtype=bool) for costs in costs_by_frame]
        true_positive = np.zeros(len(ranked))
        for rank, (_, position, row) in enumerate(ranked):
            costs = costs_by_frame[position][row]
            candidates = np.where(taken[position] | (costs > threshold), np.inf, costs)
            if candidates.size and np.isfinite(candidates.min()):
                taken[position][int(np.argmin(candidates))] = True
                true_positive[rank] = 1.0
        result[threshold] = interpolated_ap(true_positive, gt_count)
    return result


def chamfer_ap(frames, thresholds, config):
    """
    Per-class AP averaged over ``thresholds`` and mAP averaged over the
    classes that have ground truth.
    """
    frames = list(frames)
    labels = set()
    for frame in frames:
        labels.update(g.class_label for g in frame.ground_truth)
        labels.update(p.class_label for p in frame.predictions)
    per_threshold = {}
    for label in sorted(labels):
        aps = class_ap(frames, label, thresholds, config.get_chamfer_resolution())
        if aps is not None:
            per_threshold[label] = aps
    per_class = dict((label, exact_mean(aps.values())) for label, aps in per_threshold.items())
    return PrecisionReport(
        per_class=per_class,
        per_threshold=per_threshold,
        thresholds=tuple(thresholds),
        map=exact_mean(per_class.values()) if per_class else 0.0,
    )
