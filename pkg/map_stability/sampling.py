"""
Construction of the evaluation frame pairs of one scene.

For every anchor frame a forward offset is drawn uniformly from
``1..M``. Anchors are 0-based positions in ``SequenceView.frames``; the
first anchor is frame 1 in 1-based numbering.
"""
from dataclasses import dataclass

from map_stability.utils import SequenceTooShort, scene_rng


@dataclass(frozen=True)
class PairSample(object):
    anchor: int
    offset: int

    @property
    def target(self):
        return self.anchor + self.offset


def sample_pairs(seq, max_interval, seed):
    """
    Returns exactly ``len(seq) - max_interval`` :class:`PairSample` objects
    in anchor order. The offsets come from a stream keyed on ``seed`` and
    the scene id, so the result does not depend on which other scenes are
    evaluated, or in which order.
    """
    if max_interval < 1:
        raise ValueError('The maximum interval must be at least 1, got %d' % max_interval)
    length = len(seq)
    if length <= max_interval:
        raise SequenceTooShort(seq.scene_id, length, max_interval)
    rng = scene_rng(seed, seq.scene_id, 'sampling')
    offsets = rng.integers(1, max_interval, size=length - max_interval, endpoint=True)
    return [PairSample(anchor=t, offset=int(k)) for t, k in enumerate(offsets)]
