import math
import unittest

import numpy as np

from map_stability.geometry import (
    PolyLine2D, RigidPose2D, PerceptionRange, ResampledPair, Point2D,
    transform_polyline, clip_to_range, resample_pair, curvature, monotonize, densify, wrap_angle,
)
from map_stability.utils import InvalidGeometry, DegeneratePolyline

from tests.base import BaseTest


class PolyLineTests(BaseTest):
    def test_needs_two_points(self):
        with self.assertRaises(InvalidGeometry):
            PolyLine2D([(0.0, 0.0)])

    def test_rejects_non_finite(self):
        with self.assertRaises(InvalidGeometry):
            PolyLine2D([(0.0, 0.0), (1.0, float('nan'))])
        with self.assertRaises(InvalidGeometry):
            Point2D(float('inf'), 0.0)

    def test_rejects_consecutive_duplicates(self):
        with self.assertRaises(InvalidGeometry):
            PolyLine2D([(0.0, 0.0), (1.0, 0.0), (1.0, 0.0)])

    def test_allows_closed_ring(self):
        ring = PolyLine2D([(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)])
        self.assertEqual(len(ring), 5)
        self.assertMetric(ring.length, 4.0)

    def test_coords_read_only(self):
        poly = self.line()
        with self.assertRaises(ValueError):
            poly.coords[0, 0] = 5.0

    def test_equality(self):
        self.assertEqual(self.line(1.0), self.line(1.0))
        self.assertNotEqual(self.line(1.0), self.line(2.0))
        self.assertEqual(hash(self.line(1.0)), hash(self.line(1.0)))


class PoseTests(BaseTest):
    def test_yaw_wrapped(self):
        self.assertMetric(RigidPose2D(0, 0, 3 * math.pi).yaw, math.pi)
        self.assertMetric(RigidPose2D(0, 0, -math.pi).yaw, math.pi)
        self.assertMetric(wrap_angle(-math.pi / 2 - 2 * math.pi), -math.pi / 2)

    def test_compose_with_inverse_is_identity(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            pose = RigidPose2D(*rng.uniform(-50, 50, 2), yaw=rng.uniform(-math.pi, math.pi))
            identity = pose.compose(pose.inverse())
            self.assertMetric(identity.x, 0.0)
            self.assertMetric(identity.y, 0.0)
            self.assertMetric(math.sin(identity.yaw), 0.0)

    def test_matrix_matches_apply(self):
        pose = RigidPose2D(2.0, -1.0, 0.3)
        point = np.array([4.0, 5.0])
        homogeneous = pose.matrix() @ np.array([4.0, 5.0, 1.0])
        self.assertTrue(np.allclose(homogeneous[:2], pose.apply(point)))
        self.assertTrue(np.allclose(pose.apply_inverse(pose.apply(point)), point))


class TransformTests(BaseTest):
    def test_identical_poses(self):
        poly = self.line()
        pose = self.pose(3.0, 4.0, 0.5)
        self.assertIs(transform_polyline(poly, pose, pose), poly)

    def test_translation(self):
        poly = PolyLine2D([(0.0, 0.0), (1.0, 0.0)])
        moved = transform_polyline(poly, self.pose(1.0, 0.0, 0.0), self.pose())
        self.assertPolylineClose(moved, [(1.0, 0.0), (2.0, 0.0)])

    def test_rotation(self):
        poly = PolyLine2D([(1.0, 0.0), (2.0, 0.0)])
        moved = transform_polyline(poly, self.pose(0.0, 0.0, math.pi / 2), self.pose())
        self.assertPolylineClose(moved, [(0.0, 1.0), (0.0, 2.0)])

    def test_round_trip(self):
        rng = np.random.default_rng(11)
        poly = PolyLine2D(np.column_stack([np.arange(10.0), rng.normal(size=10)]))
        a = self.pose(5.0, -2.0, 0.7)
        b = self.pose(-3.0, 8.0, -2.1)
        back = transform_polyline(transform_polyline(poly, a, b), b, a)
        self.assertPolylineClose(back, poly)


class ClipTests(BaseTest):
    def test_all_inside(self):
        poly = self.line()
        self.assertIs(clip_to_range(poly, PerceptionRange()), poly)

    def test_all_outside(self):
        poly = self.line(y=50.0)
        self.assertIsNone(clip_to_range(poly, PerceptionRange()))

    def test_middle_point_outside(self):
        poly = PolyLine2D([(0.0, 0.0), (0.0, 40.0), (1.0, 0.0)])
        clipped = clip_to_range(poly, PerceptionRange())
        self.assertPolylineClose(clipped, [(0.0, 0.0), (1.0, 0.0)])

    def test_one_point_left(self):
        poly = PolyLine2D([(0.0, 0.0), (20.0, 0.0)])
        self.assertIsNone(clip_to_range(poly, PerceptionRange()))

    def test_output_is_subsequence(self):
        rng = np.random.default_rng(5)
        coords = rng.uniform(-40, 40, size=(30, 2))
        clipped = clip_to_range(PolyLine2D(coords), PerceptionRange())
        rows = [tuple(row) for row in coords]
        position = -1
        for row in clipped.coords:
            position = rows.index(tuple(row), position + 1)

    def test_range_validation(self):
        with self.assertRaises(InvalidGeometry):
            PerceptionRange(x_min=1.0, x_max=1.0)


class ResampleTests(BaseTest):
    def test_identical_segments(self):
        segment = PolyLine2D([(0.0, 0.0), (10.0, 0.0)])
        pair = resample_pair(segment, segment, 3)
        self.assertEqual(pair.xs.tolist(), [0.0, 5.0, 10.0])
        self.assertEqual(pair.y_current.tolist(), [0.0, 0.0, 0.0])
        self.assertEqual(pair.y_history.tolist(), [0.0, 0.0, 0.0])

    def test_common_range(self):
        current = PolyLine2D([(0.0, 0.0), (10.0, 0.0)])
        history = PolyLine2D([(5.0, 1.0), (15.0, 1.0)])
        pair = resample_pair(current, history, 2)
        self.assertEqual(pair.xs.tolist(), [5.0, 10.0])
        self.assertEqual(pair.y_history.tolist(), [1.0, 1.0])

    def test_disjoint(self):
        self.assertIsNone(resample_pair(PolyLine2D([(0, 0), (1, 0)]), PolyLine2D([(2, 0), (3, 0)]), 10))

    def test_needs_two_samples(self):
        with self.assertRaises(InvalidGeometry):
            resample_pair(self.line(), self.line(), 1)

    def test_equally_spaced_inside_hulls(self):
        current = PolyLine2D([(-3.2, 0.0), (4.0, 1.0), (9.7, -1.0)])
        history = PolyLine2D([(-5.0, 2.0), (7.3, 0.5)])
        pair = resample_pair(current, history, 100)
        steps = np.diff(pair.xs)
        self.assertTrue(np.allclose(steps, steps[0], rtol=1e-9, atol=0))
        self.assertEqual(pair.xs[0], -3.2)
        self.assertMetric(pair.xs[-1], 7.3)

    def test_reversed_polyline(self):
        forward = PolyLine2D([(0.0, 0.0), (10.0, 5.0)])
        backward = PolyLine2D([(10.0, 5.0), (0.0, 0.0)])
        pair = resample_pair(forward, backward, 11)
        self.assertTrue(np.allclose(pair.y_current, pair.y_history))

    def test_monotonize_averages_duplicates(self):
        xs, ys = monotonize([(0.0, 1.0), (1.0, 0.0), (1.0, 2.0), (0.0, -1.0)])
        self.assertEqual(xs.tolist(), [0.0, 1.0])
        self.assertEqual(ys.tolist(), [0.0, 1.0])

    def test_resampled_pair_validation(self):
        with self.assertRaises(InvalidGeometry):
            ResampledPair([0.0, 0.0], [0.0, 0.0], [0.0, 0.0])
        with self.assertRaises(InvalidGeometry):
            ResampledPair([0.0, 1.0], [0.0], [0.0, 0.0])


class CurvatureTests(BaseTest):
    def test_collinear(self):
        self.assertMetric(curvature([(0, 0), (1, 0), (2, 0)]), 0.0)

    def test_right_angle(self):
        self.assertMetric(curvature(self.right_angle()), math.pi / 2)

    def test_staircase(self):
        self.assertMetric(curvature([(0, 0), (1, 0), (1, 1), (2, 1)]), math.pi / 2)

    def test_reversal(self):
        self.assertMetric(curvature([(0, 0), (1, 0), (0, 0)]), math.pi)

    def test_degenerate(self):
        with self.assertRaisesRegex(DegeneratePolyline, 'degenerate polyline'):
            curvature([(0, 0), (1, 0)])
        with self.assertRaisesRegex(DegeneratePolyline, 'degenerate segment'):
            curvature([(0, 0), (1, 0), (1, 0)])

    def test_rigid_invariance(self):
        rng = np.random.default_rng(7)
        points = np.cumsum(rng.normal(size=(20, 2)), axis=0)
        pose = self.pose(12.0, -4.0, 1.1)
        self.assertMetric(curvature(pose.apply(points)), curvature(points))


class DensifyTests(BaseTest):
    def test_arc_length_spacing(self):
        poly = PolyLine2D([(0.0, 0.0), (3.0, 0.0), (3.0, 1.0)])
        points = densify(poly, 5)
        self.assertTrue(np.allclose(points, [(0, 0), (1, 0), (2, 0), (3, 0), (3, 1)]))


if __name__ == '__main__':
    unittest.main()
