import hashlib
import math

import numpy as np


class ImproperlyConfigured(Exception):
    """Evaluation or generator settings are somehow improperly configured"""

    def __init__(self, message, errors=None):
        super(ImproperlyConfigured, self).__init__(message)
        self.errors = errors or {}


class InvalidGeometry(ValueError):
    """A geometric value violates one of its invariants"""
    pass


class DegeneratePolyline(InvalidGeometry):
    """A polyline has too few points or a zero-length segment for the operation"""
    pass


class SequenceTooShort(Exception):
    """A scene holds no more frames than the maximum sampling interval"""

    def __init__(self, scene_id, length, max_interval):
        super(SequenceTooShort, self).__init__(
            'sequence too short: scene %r has %d frames, interval M is %d' % (scene_id, length, max_interval))
        self.scene_id = scene_id
        self.length = length
        self.max_interval = max_interval


class NoEvaluablePairs(Exception):
    """Not a single frame pair could be evaluated"""
    pass


class InvalidSequenceFile(Exception):
    """A sequence file line is malformed or breaks a sequence invariant"""

    def __init__(self, message, path=None, line=None, field=None, scene_id=None, frame_index=None):
        self.path = path
        self.line = line
        self.field = field
        self.scene_id = scene_id
        self.frame_index = frame_index
        location = []
        if path is not None:
            location.append(str(path))
        if line is not None:
            location.append('line %d' % line)
        if field is not None:
            location.append('field %r' % field)
        if scene_id is not None:
            location.append('scene %r' % scene_id)
        if frame_index is not None:
            location.append('frame %d' % frame_index)
        if location:
            message = '%s: %s' % (', '.join(location), message)
        super(InvalidSequenceFile, self).__init__(message)


class classonlymethod(classmethod):
    def __get__(self, instance, owner):
        if instance is not None:
            raise AttributeError("This method is available only on the evaluation class.")
        return super(classonlymethod, self).__get__(instance, owner)


def stable_key(value):
    """Return a process-independent 32 bit integer for ``value``.

    The builtin ``hash()`` is salted per interpreter, so seeded streams
    are keyed on a digest instead.
    """
    digest = hashlib.sha256(str(value).encode('utf-8')).digest()
    return int.from_bytes(digest[:4], 'little')


def scene_rng(seed, scene_id, purpose):
    """A generator for one (seed, scene, purpose) stream.

    Streams are spawned from a single ``SeedSequence`` so scenes can be
    processed in any order, or in parallel, without perturbing each other.
    """
    sequence = np.random.SeedSequence(
        entropy=int(seed) & 0xFFFFFFFFFFFFFFFF,
        spawn_key=(stable_key(scene_id), stable_key(purpose)))
    return np.random.Generator(np.random.PCG64(sequence))


def exact_mean(values):
    """Order independent mean (compensated summation), ``None`` when empty"""
    values = list(values)
    if not values:
        return None
    return math.fsum(values) / len(values)


def file_digest(path):
    sha = hashlib.sha256()
    with open(path, 'rb') as handle:
        for chunk in iter(lambda: handle.read(65536), b''):
            sha.update(chunk)
    return sha.hexdigest()
