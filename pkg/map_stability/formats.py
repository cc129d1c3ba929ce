"""
File formats: line-delimited sequence files, report documents and
plot-data tables.

A sequence file holds one JSON record per line, one frame per record::

    {"scene_id": "scene-0000", "frame_index": 0, "timestamp": 0.0,
     "ego_pose": {"x": 0.0, "y": 0.0, "yaw": 0.0},
     "predictions": [{"id": "0:0", "class": "divider", "points": [[0, 1.75], [1, 1.75]], "score": 0.9}],
     "ground_truth": [{"track_id": "divider-2", "class": "divider", "points": [[0, 1.75], [1, 1.75]]}]}

Prediction ``id`` is optional and defaults to ``"<frame_index>:<position>"``.
Blank lines are ignored.
"""
import csv
import json
import logging
import math
from collections import OrderedDict

import map_stability
from map_stability.geometry import RigidPose2D
from map_stability.models import MapElement, FrameRecord, SequenceView
from map_stability.utils import InvalidSequenceFile, InvalidGeometry, ImproperlyConfigured, file_digest

logger = logging.getLogger(__name__)

PLOT_KINDS = ('scatter_map_mas', 'per_class_bars', 'm_sweep')
INCLUDE_CHOICES = ('both', 'predictions', 'ground_truth')


def is_finite(value):
    try:
        return math.isfinite(value)
    except OverflowError:
        return False


def require(record, key, kind, path, line, prefix=''):
    if key not in record:
        raise InvalidSequenceFile('missing field', path=path, line=line, field=prefix + key)
    value = record[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise InvalidSequenceFile('expected %s, got %r' % (getattr(kind, '__name__', 'number'), value),
                                  path=path, line=line, field=prefix + key)
    if isinstance(value, (int, float)) and not is_finite(value):
        raise InvalidSequenceFile('not a finite number', path=path, line=line, field=prefix + key)
    return value


def parse_points(value, path, line, field):
    if not isinstance(value, list) or len(value) < 2:
        raise InvalidSequenceFile('a polyline needs at least 2 points', path=path, line=line, field=field)
    for point in value:
        if not (isinstance(point, list) and len(point) == 2 and
                all(isinstance(c, (int, float)) and not isinstance(c, bool) and is_finite(c) for c in point)):
            raise InvalidSequenceFile('points must be finite [x, y] pairs', path=path, line=line, field=field)
    return value


def parse_element(raw, frame_index, position, is_prediction, path, line):
    prefix = '%s[%d].' % ('predictions' if is_prediction else 'ground_truth', position)
    if not isinstance(raw, dict):
        raise InvalidSequenceFile('expected an object', path=path, line=line, field=prefix.rstrip('.'))
    class_label = require(raw, 'class', str, path, line, prefix)
    points = parse_points(raw.get('points'), path, line, prefix + 'points')
    try:
        if is_prediction:
            score = require(raw, 'score', (int, float), path, line, prefix)
            element_id = raw.get('id', '%d:%d' % (frame_index, position))
            return MapElement.prediction(element_id, class_label, points, score)
        track_id = raw.get('track_id')
        if track_id is None or isinstance(track_id, (dict, list, bool)):
            raise InvalidSequenceFile('missing field', path=path, line=line, field=prefix + 'track_id')
        return MapElement.ground_truth(track_id, class_label, points)
    except InvalidGeometry as e:
        raise InvalidSequenceFile(str(e), path=path, line=line, field=prefix.rstrip('.'))


def parse_record(record, path=None, line=None, require_pose=True):
    """
    Returns the :class:`FrameRecord` of one decoded line. Raises
    ``InvalidSequenceFile`` naming the line and field of the first problem.
    """
    if not isinstance(record, dict):
        raise InvalidSequenceFile('expected a JSON object', path=path, line=line)
    scene_id = require(record, 'scene_id', str, path, line)
    frame_index = require(record, 'frame_index', int, path, line)
    timestamp = require(record, 'timestamp', (int, float), path, line)
    pose = RigidPose2D(0.0, 0.0, 0.0)
    if require_pose or 'ego_pose' in record:
        raw_pose = require(record, 'ego_pose', dict, path, line)
        pose = RigidPose2D(*(float(require(raw_pose, key, (int, float), path, line, 'ego_pose.'))
                             for key in ('x', 'y', 'yaw')))
    elements = {}
    for key in ('predictions', 'ground_truth'):
        raw = record.get(key, [])
        if not isinstance(raw, list):
            raise InvalidSequenceFile('expected a list', path=path, line=line, field=key)
        elements[key] = [parse_element(e, frame_index, i, key == 'predictions', path, line)
                         for i, e in enumerate(raw)]
    try:
        return FrameRecord(scene_id=scene_id, frame_index=frame_index, timestamp=float(timestamp),
                           ego_pose=pose, predictions=elements['predictions'],
                           ground_truth=elements['ground_truth'])
    except InvalidGeometry as e:
        raise InvalidSequenceFile(str(e), path=path, line=line, scene_id=scene_id, frame_index=frame_index)


def read_frames(path, require_pose=True):
    """Yields ``(line_number, FrameRecord)`` for every non-blank line"""
    with open(path, 'rb') as handle:
        for number, raw in enumerate(handle, start=1):
            try:
                text = raw.decode('utf-8')
            except UnicodeDecodeError as e:
                raise InvalidSequenceFile('not UTF-8 text (%s)' % e.reason, path=path, line=number)
            if not text.strip():
                continue
            try:
                record = json.loads(text)
            except ValueError as e:
                raise InvalidSequenceFile('malformed JSON (%s)' % e, path=path, line=number)
            yield number, parse_record(record, path, number, require_pose)


def group_frames(frames, path=None):
    """
    Groups ``(line, FrameRecord)`` items by scene. Frame indices must be
    strictly increasing within a scene in file order.
    """
    scenes = OrderedDict()
    for line, frame in frames:
        scene = scenes.setdefault(frame.scene_id, [])
        if scene and frame.frame_index <= scene[-1].frame_index:
            raise InvalidSequenceFile('frame_index %d does not follow %d' % (frame.frame_index, scene[-1].frame_index),
                                      path=path, line=line, scene_id=frame.scene_id, frame_index=frame.frame_index)
        scene.append(frame)
    if not scenes:
        raise InvalidSequenceFile('no frames', path=path)
    sequences = []
    for scene_id in sorted(scenes):
        try:
            sequences.append(SequenceView(scene_id=scene_id, frames=scenes[scene_id]))
        except InvalidGeometry as e:
            raise InvalidSequenceFile(str(e), path=path, scene_id=scene_id)
    return sequences


def load_sequences(path, require_pose=True):
    """
    Parse and validate a sequence file. Returns one :class:`SequenceView`
    per scene, sorted by scene id.
    """
    sequences = group_frames(read_frames(path, require_pose), path)
    logger.info('Loaded %d scenes (%d frames) from %s', len(sequences), sum(len(s) for s in sequences), path)
    return sequences


def merge_split(predicted, ground_truth, pred_path=None):
    """
    Combine a prediction-only and a ground-truth-only load into combined
    sequences. Ego poses and timestamps come from the ground truth.
    """
    predicted_frames = dict(((s.scene_id, f.frame_index), f) for s in predicted for f in s)
    merged = []
    for seq in ground_truth:
        frames = []
        for frame in seq:
            prediction = predicted_frames.pop((seq.scene_id, frame.frame_index), None)
            if prediction is None:
                raise InvalidSequenceFile('no prediction frame for this ground truth frame',
                                          path=pred_path, scene_id=seq.scene_id, frame_index=frame.frame_index)
            frames.append(frame.replace(predictions=prediction.predictions))
        merged.append(SequenceView(scene_id=seq.scene_id, frames=frames))
    if predicted_frames:
        scene_id, frame_index = sorted(predicted_frames)[0]
        raise InvalidSequenceFile('prediction frame has no ground truth counterpart',
                                  path=pred_path, scene_id=scene_id, frame_index=frame_index)
    return merged


def load_inputs(pred_path, gt_path=None):
    """Combined-file mode when ``gt_path`` is ``None``, split-file mode otherwise"""
    if gt_path is None:
        return load_sequences(pred_path)
    return merge_split(load_sequences(pred_path, require_pose=False), load_sequences(gt_path), pred_path)


def element_record(element):
    record = {
        'class': element.class_label,
        'points': [[float(x), float(y)] for x, y in element.geometry.coords],
    }
    if element.is_prediction:
        record.update(id=element.element_id, score=float(element.score))
    else:
        record['track_id'] = element.gt_track_id
    return record


def frame_record(frame, include='both'):
    record = {
        'scene_id': frame.scene_id,
        'frame_index': frame.frame_index,
        'timestamp': float(frame.timestamp),
        'ego_pose': {'x': float(frame.ego_pose.x), 'y': float(frame.ego_pose.y), 'yaw': float(frame.ego_pose.yaw)},
    }
    if include in ('both', 'predictions'):
        record['predictions'] = [element_record(e) for e in frame.predictions]
    if include in ('both', 'ground_truth'):
        record['ground_truth'] = [element_record(e) for e in frame.ground_truth]
    return record


def write_sequences(path, sequences, include='both'):
    """
    Write ``sequences`` as a sequence file. ``include`` selects combined
    output or one side of a split pair.
    """
    if include not in INCLUDE_CHOICES:
        raise ImproperlyConfigured('include must be one of %s' % ', '.join(INCLUDE_CHOICES))
    with open(path, 'w') as handle:
        for seq in sequences:
            for frame in seq:
                handle.write(json.dumps(frame_record(frame, include), sort_keys=True))
                handle.write('\n')


def build_report(stability, precision, config, input_paths=()):
    """
    The report document: stability and precision sections, the resolved
    config, the toolkit version and the SHA-256 of every input file.
    """
    per_class = {}
    for label, summary in stability.per_class.items():
        per_class[label] = summary.as_dict()
        if precision is not None:
            per_class[label]['ap'] = precision.per_class.get(label)
    document = {
        'version': map_stability.__version__,
        'config': config.as_dict(),
        'inputs': [{'path': str(path), 'sha256': file_digest(path)} for path in input_paths],
        'stability': {
            'mas': stability.mas,
            'mas_matched_only': stability.mas_matched_only,
            'presence': stability.overall('presence_mean'),
            'loc': stability.overall('loc_mean'),
            'shape': stability.overall('shape_mean'),
            'pair_count': stability.pair_count,
            'instance_count': stability.instance_count,
            'skipped_scene_count': stability.skipped_scene_count,
            'per_class': per_class,
        },
    }
    if precision is not None:
        document['precision'] = precision.as_dict()
    return document


def dumps_report(document):
    return json.dumps(document, sort_keys=True, indent=2) + '\n'


def percent(value):
    return '-' if value is None else '%.2f' % (100.0 * value)


def format_table(document):
    """A fixed-width table of a report on the 0-100 scale"""
    stability = document['stability']
    header = ('class', 'presence', 'loc', 'shape', 'stability', 'AP', 'instances')
    rows = [header]
    for label in sorted(stability['per_class']):
        summary = stability['per_class'][label]
        rows.append((label, percent(summary['presence']), percent(summary['loc']), percent(summary['shape']),
                     percent(summary['stability']), percent(summary.get('ap')), str(summary['instance_count'])))
    precision = document.get('precision') or {}
    rows.append(('overall', percent(stability['presence']), percent(stability['loc']), percent(stability['shape']),
                 percent(stability['mas']), percent(precision.get('map')), str(stability['instance_count'])))
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append('  '.join(cell.ljust(widths[j]) if j == 0 else cell.rjust(widths[j])
                               for j, cell in enumerate(row)))
        if i == 0 or i == len(rows) - 2:
            lines.append('  '.join('-' * w for w in widths))
    lines.append('mAS %s  mAS (matched only) %s  mAP %s  pairs %d  skipped scenes %d' % (
        percent(stability['mas']), percent(stability['mas_matched_only']), percent(precision.get('map')),
        stability['pair_count'], stability['skipped_scene_count']))
    return '\n'.join(lines) + '\n'


def report_label(document, index):
    return document.get('label') or 'report-%d' % index


def emit_plot_data(reports, kind, out):
    """
    Write a CSV table for external plotting, metrics on the 0-1 scale.

    * ``scatter_map_mas``: label, map, mas (one row per report)
    * ``per_class_bars``: label, class, presence, loc, shape, stability (one row per report and class)
    * ``m_sweep``: m, mas, presence, loc, shape (one row per report, sorted by M)
    """
    if kind not in PLOT_KINDS:
        raise ImproperlyConfigured('Unknown plot kind %r, expected one of %s' % (kind, ', '.join(PLOT_KINDS)))
    reports = list(reports)
    if not reports:
        raise ImproperlyConfigured('At least one report is required')
    writer = csv.writer(out, lineterminator='\n')
    if kind == 'scatter_map_mas':
        writer.writerow(('label', 'map', 'mas'))
        for i, document in enumerate(reports):
            writer.writerow((report_label(document, i), cell((document.get('precision') or {}).get('map')),
                             cell(document['stability']['mas'])))
    elif kind == 'per_class_bars':
        writer.writerow(('label', 'class', 'presence', 'loc', 'shape', 'stability'))
        for i, document in enumerate(reports):
            per_class = document['stability']['per_class']
            for label in sorted(per_class):
                summary = per_class[label]
                writer.writerow((report_label(document, i), label, cell(summary['presence']), cell(summary['loc']),
                                 cell(summary['shape']), cell(summary['stability'])))
    else:
        writer.writerow(('m', 'mas', 'presence', 'loc', 'shape'))
        for document in sorted(reports, key=lambda d: d['config']['m']):
            stability = document['stability']
            writer.writerow((document['config']['m'], cell(stability['mas']), cell(stability['presence']),
                             cell(stability['loc']), cell(stability['shape'])))


def cell(value):
    return '' if value is None else repr(float(value))
