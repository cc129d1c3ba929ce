import itertools
import math
import unittest

import numpy as np

from map_stability.config import EvalConfig
from map_stability.geometry import PolyLine2D
from map_stability.matching import (
    hungarian, chamfer_cost, build_cost_matrix, match_frame, associate_pair, find_one_sided,
)

from tests.base import BaseTest


def brute_force(cost):
    """Most finite pairs, then least total cost, over every partial assignment"""
    rows, cols = cost.shape
    best = (0, 0.0)
    if rows <= cols:
        options = itertools.permutations(range(cols), rows)
        pairs_of = lambda perm: list(zip(range(rows), perm))
    else:
        options = itertools.permutations(range(rows), cols)
        pairs_of = lambda perm: list(zip(perm, range(cols)))
    for perm in options:
        finite = [cost[r, c] for r, c in pairs_of(perm) if np.isfinite(cost[r, c])]
        key = (-len(finite), math.fsum(finite))
        if key < (-best[0], best[1]):
            best = (len(finite), math.fsum(finite))
    return best


class HungarianTests(BaseTest):
    def test_empty(self):
        self.assertEqual(hungarian(np.zeros((0, 3))), [])
        self.assertEqual(hungarian(np.full((2, 2), np.inf)), [])

    def test_simple(self):
        cost = np.array([[4.0, 1.0], [2.0, 3.0]])
        self.assertEqual(hungarian(cost), [(0, 1), (1, 0)])

    def test_rectangular(self):
        cost = np.array([[5.0, 1.0, 9.0]])
        self.assertEqual(hungarian(cost), [(0, 1)])

    def test_infinite_entries_never_assigned(self):
        cost = np.array([[1.0, np.inf], [np.inf, np.inf]])
        self.assertEqual(hungarian(cost), [(0, 0)])

    def test_prefers_more_finite_pairs(self):
        cost = np.array([[1.0, 2.0], [np.inf, 100.0]])
        self.assertEqual(hungarian(cost), [(0, 0), (1, 1)])

    def test_matches_exhaustive_search(self):
        rng = np.random.default_rng(20240501)
        for _ in range(500):
            rows, cols = rng.integers(1, 8, size=2)
            cost = rng.integers(0, 50, size=(rows, cols)).astype(float)
            cost[rng.random((rows, cols)) < 0.2] = np.inf
            assignment = hungarian(cost)
            finite = [cost[r, c] for r, c in assignment]
            self.assertTrue(all(np.isfinite(finite)))
            self.assertEqual(len(set(r for r, _ in assignment)), len(assignment))
            self.assertEqual(len(set(c for _, c in assignment)), len(assignment))
            self.assertEqual((len(finite), math.fsum(finite)), brute_force(cost))


class ChamferTests(BaseTest):
    def test_identical(self):
        self.assertEqual(chamfer_cost(self.line(), self.line(), 50), 0.0)

    def test_parallel_offset(self):
        self.assertMetric(chamfer_cost(self.line(0.0), self.line(1.5), 21), 1.5)

    def test_symmetric(self):
        a = PolyLine2D([(0, 0), (5, 1), (10, 0)])
        b = PolyLine2D([(0, 2), (10, 2)])
        self.assertMetric(chamfer_cost(a, b, 30), chamfer_cost(b, a, 30))

    def test_class_gated_matrix(self):
        predictions = [self.prediction('p0', 'divider'), self.prediction('p1', 'crosswalk')]
        ground_truth = [self.ground_truth('g0', 'divider')]
        matrix = build_cost_matrix(predictions, ground_truth, 20)
        self.assertEqual(matrix[0, 0], 0.0)
        self.assertTrue(np.isinf(matrix[1, 0]))


class MatchFrameTests(BaseTest):
    def test_clone_matches_itself(self):
        frame = self.static_sequence(1)[0]
        match = match_frame(frame, self.config)
        self.assertEqual(sorted((p.prediction_id, p.gt_track_id) for p in match.pairs),
                         [('0:0', 'g0'), ('0:1', 'g1')])
        self.assertEqual(match.unmatched_predictions, ())
        self.assertEqual(match.unmatched_gt, ())

    def test_gate(self):
        frame = self.frame(0, [self.prediction('far', points=self.line(6.0).coords)], [self.ground_truth('g0')])
        match = match_frame(frame, self.config)
        self.assertEqual(match.pairs, ())
        self.assertEqual(match.unmatched_predictions, ('far',))
        self.assertEqual(match.unmatched_gt, ('g0',))
        wide = match_frame(frame, EvalConfig(match_gate=10.0))
        self.assertEqual(len(wide.pairs), 1)

    def test_empty_frame(self):
        match = match_frame(self.frame(0, [], [self.ground_truth('g0')]), self.config)
        self.assertEqual(match.pairs, ())
        self.assertEqual(match.unmatched_gt, ('g0',))


class MatchFrameOptimalityTests(BaseTest):
    classes = ('divider', 'crosswalk')

    def setUp(self):
        super(MatchFrameOptimalityTests, self).setUp()
        self.rng = np.random.default_rng(7)
        self.config = EvalConfig(match_gate=100.0)

    def random_line(self):
        xs = np.linspace(-10.0, 10.0, 21)
        return np.column_stack([xs, self.rng.uniform(-4.0, 4.0) + self.rng.uniform(-0.2, 0.2) * xs])

    def random_frame(self, count):
        labels = [self.classes[i] for i in self.rng.integers(0, 2, size=2 * count)]
        predictions = [self.prediction('p%d' % i, labels[i], self.random_line(), 0.9) for i in range(count)]
        ground_truth = [self.ground_truth('g%d' % i, labels[count + i], self.random_line()) for i in range(count)]
        return self.frame(0, predictions, ground_truth)

    def exhaustive_costs(self, frame):
        resolution = self.config.get_chamfer_resolution()
        cost = np.full((len(frame.predictions), len(frame.ground_truth)), np.inf)
        for i, pred in enumerate(frame.predictions):
            for j, gt in enumerate(frame.ground_truth):
                if pred.class_label == gt.class_label:
                    cost[i, j] = chamfer_cost(pred.geometry, gt.geometry, resolution)
        return cost

    def assertSameClass(self, frame, match):
        for pair in match.pairs:
            self.assertEqual(frame.get_prediction(pair.prediction_id).class_label,
                             frame.get_ground_truth(pair.gt_track_id).class_label)

    def test_three_by_three_is_minimal(self):
        for _ in range(50):
            frame = self.random_frame(3)
            match = match_frame(frame, self.config)
            count, total = brute_force(self.exhaustive_costs(frame))
            self.assertEqual(len(match.pairs), count)
            self.assertAlmostEqual(math.fsum(pair.cost for pair in match.pairs), total, delta=1e-9)
            self.assertSameClass(frame, match)

    def test_prediction_order_does_not_matter(self):
        for _ in range(20):
            frame = self.random_frame(5)
            expected = set((p.prediction_id, p.gt_track_id) for p in match_frame(frame, self.config).pairs)
            order = self.rng.permutation(len(frame.predictions))
            shuffled = frame.replace(predictions=[frame.predictions[i] for i in order])
            match = match_frame(shuffled, self.config)
            self.assertEqual(set((p.prediction_id, p.gt_track_id) for p in match.pairs), expected)
            self.assertSameClass(shuffled, match)


class AssociationTests(BaseTest):
    def setUp(self):
        super(AssociationTests, self).setUp()
        ground_truth = [self.ground_truth('g0', points=self.line(0.0).coords),
                        self.ground_truth('g1', points=self.line(3.5).coords)]
        self.frame_t = self.frame(0, [self.prediction('a', points=self.line(0.1).coords, score=0.9),
                                      self.prediction('b', points=self.line(3.4).coords, score=0.8)], ground_truth)
        self.frame_tk = self.frame(1, [self.prediction('c', points=self.line(0.2).coords, score=0.7)], ground_truth,
                                   pose=self.pose(1.0, 0.0, 0.0))
        self.match_t = match_frame(self.frame_t, self.config)
        self.match_tk = match_frame(self.frame_tk, self.config)

    def test_associate(self):
        pairs = associate_pair(self.frame_t, self.frame_tk, self.match_t, self.match_tk)
        self.assertEqual(len(pairs), 1)
        pair = pairs[0]
        self.assertEqual(pair.gt_track_id, 'g0')
        self.assertEqual(pair.score_history, 0.9)
        self.assertEqual(pair.score_current, 0.7)
        self.assertEqual(pair.poly_history, self.line(0.1))
        self.assertEqual(pair.pose_current, self.pose(1.0, 0.0, 0.0))

    def test_one_sided(self):
        one_sided = find_one_sided(self.frame_t, self.frame_tk, self.match_t, self.match_tk)
        self.assertEqual(len(one_sided), 1)
        self.assertEqual(one_sided[0].gt_track_id, 'g1')
        self.assertEqual(one_sided[0].score_history, 0.8)
        self.assertIsNone(one_sided[0].score_current)

    def test_leaving_view_is_not_one_sided(self):
        frame_tk = self.frame(1, [self.prediction('c', points=self.line(0.2).coords)],
                              [self.ground_truth('g0', points=self.line(0.0).coords)])
        match_tk = match_frame(frame_tk, self.config)
        self.assertEqual(find_one_sided(self.frame_t, frame_tk, self.match_t, match_tk), [])


if __name__ == '__main__':
    unittest.main()
