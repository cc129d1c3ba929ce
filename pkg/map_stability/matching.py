"""
Frame-to-ground-truth assignment and ground-truth mediated association of
predictions across the two frames of a pair.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from map_stability.geometry import densify

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchPair(object):
    prediction_id: str
    gt_track_id: str
    cost: float


@dataclass(frozen=True)
class FrameMatch(object):
    """The assignment of one frame's predictions to its ground truth"""
    frame_index: int
    pairs: tuple = ()
    unmatched_predictions: tuple = ()
    unmatched_gt: tuple = ()

    def by_track(self):
        return dict((pair.gt_track_id, pair) for pair in self.pairs)


@dataclass(frozen=True)
class MatchedInstancePair(object):
    """The predictions of one ground truth element in both frames of a pair"""
    gt_track_id: str
    class_label: str
    poly_current: object
    poly_history: object
    score_current: float
    score_history: float
    pose_current: object
    pose_history: object


@dataclass(frozen=True)
class OneSidedMatch(object):
    """
    A ground truth element present in both frames of a pair whose
    prediction was matched in only one of them. The missing side's score
    is ``None``.
    """
    gt_track_id: str
    class_label: str
    score_current: float = None
    score_history: float = None


def chamfer_cost(pred, gt, resolution):
    """
    Symmetric mean nearest-neighbour distance between the two polylines,
    each densified to ``resolution`` points by arc length (meters).
    """
    a = densify(pred, resolution)
    b = densify(gt, resolution)
    distances = cdist(a, b)
    return float((distances.min(axis=1).mean() + distances.min(axis=0).mean()) / 2.0)


def hungarian(cost_matrix):
    """
    Minimum-cost one-to-one partial assignment over the finite entries of
    ``cost_matrix``.

    Infinite entries are never assigned. Among the assignments with the
    most finite pairs, the one with the least total cost is returned as a
    row-sorted list of ``(row, col)`` tuples.
    """
    cost = np.asarray(cost_matrix, dtype=np.float64)
    if cost.ndim != 2 or cost.size == 0:
        return []
    finite = np.isfinite(cost)
    if not finite.any():
        return []
    # The penalty outweighs any difference in finite totals, so an extra
    # finite pair always beats a cheaper but smaller assignment.
    penalty = 2.0 * np.abs(cost[finite]).sum() + 1.0
    rows, cols = linear_sum_assignment(np.where(finite, cost, penalty))
    return [(int(r), int(c)) for r, c in zip(rows, cols) if finite[r, c]]


def build_cost_matrix(predictions, ground_truth, resolution):
    """Chamfer costs for same-class pairs, ``inf`` across classes"""
    matrix = np.full((len(predictions), len(ground_truth)), np.inf)
    for i, pred in enumerate(predictions):
        for j, gt in enumerate(ground_truth):
            if pred.class_label == gt.class_label:
                matrix[i, j] = chamfer_cost(pred.geometry, gt.geometry, resolution)
    return matrix


def match_frame(frame, config):
    """
    Assign the predictions of ``frame`` to its ground truth. Assignments
    costlier than ``config.match_gate`` are released to the unmatched lists.
    """
    predictions = frame.predictions
    ground_truth = frame.ground_truth
    matrix = build_cost_matrix(predictions, ground_truth, config.get_chamfer_resolution())
    pairs = []
    used_predictions = set()
    used_gt = set()
    for row, col in hungarian(matrix):
        cost = matrix[row, col]
        if cost > config.match_gate:
            logger.debug('Dropping gated match in frame %d: %s -> %s (%.3f m)',
                         frame.frame_index, predictions[row].element_id, ground_truth[col].gt_track_id, cost,
                         extra={'scene_id': frame.scene_id, 'frame_index': frame.frame_index})
            continue
        pairs.append(MatchPair(prediction_id=predictions[row].element_id,
                               gt_track_id=ground_truth[col].gt_track_id,
                               cost=float(cost)))
        used_predictions.add(row)
        used_gt.add(col)
    return FrameMatch(
        frame_index=frame.frame_index,
        pairs=tuple(pairs),
        unmatched_predictions=tuple(p.element_id for i, p in enumerate(predictions) if i not in used_predictions),
        unmatched_gt=tuple(g.gt_track_id for j, g in enumerate(ground_truth) if j not in used_gt),
    )


def associate_pair(frame_t, frame_tk, match_t, match_tk):
    """
    Pair the predictions matched to the same ground truth track in both
    frames. Returns :class:`MatchedInstancePair` objects sorted by track id.
    """
    history = match_t.by_track()
    current = match_tk.by_track()
    pairs = []
    for track_id in sorted(set(history) & set(current)):
        pred_t = frame_t.get_prediction(history[track_id].prediction_id)
        pred_tk = frame_tk.get_prediction(current[track_id].prediction_id)
        pairs.append(MatchedInstancePair(
            gt_track_id=track_id,
            class_label=frame_tk.get_ground_truth(track_id).class_label,
            poly_current=pred_tk.geometry,
            poly_history=pred_t.geometry,
            score_current=pred_tk.score,
            score_history=pred_t.score,
            pose_current=frame_tk.ego_pose,
            pose_history=frame_t.ego_pose,
        ))
    return pairs


def find_one_sided(frame_t, frame_tk, match_t, match_tk):
    """
    Ground truth tracks visible in both frames but matched in only one.
    Tracks that enter or leave the view between the frames are not listed.
    """
    history = match_t.by_track()
    current = match_tk.by_track()
    one_sided = []
    for track_id in sorted(frame_t.track_ids() & frame_tk.track_ids()):
        if (track_id in history) == (track_id in current):
            continue
        score_history = score_current = None
        if track_id in history:
            score_history = frame_t.get_prediction(history[track_id].prediction_id).score
        else:
            score_current = frame_tk.get_prediction(current[track_id].prediction_id).score
        one_sided.append(OneSidedMatch(
            gt_track_id=track_id,
            class_label=frame_tk.get_ground_truth(track_id).class_label,
            score_current=score_current,
            score_history=score_history,
        ))
    return one_sided
