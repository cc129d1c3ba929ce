"""
The evaluation pipeline.

:class:`StabilityEvaluation` strings the steps together the way a
class-based view strings together its mixins: every step is a
``get_*`` hook on a small mixin, so a subclass can swap one step (a
different pair sampler, a precomputed matching) without touching the
others.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import update_wrapper
from itertools import repeat

from map_stability.config import EvalConfig
from map_stability.formats import load_inputs, build_report
from map_stability.matching import match_frame, associate_pair, find_one_sided
from map_stability.metrics.precision import chamfer_ap
from map_stability.metrics.stability import instance_stability, one_sided_stability, aggregate
from map_stability.sampling import sample_pairs
from map_stability.utils import SequenceTooShort, NoEvaluablePairs, ImproperlyConfigured, classonlymethod

logger = logging.getLogger(__name__)


@dataclass
class SceneResult(object):
    scene_id: str
    instances: list = field(default_factory=list)
    pair_count: int = 0
    skipped: bool = False


@dataclass(frozen=True)
class EvaluationResult(object):
    stability: object
    precision: object = None


class ConfigMixin(object):
    config = None

    def get_config(self):
        """
        Returns the :class:`EvalConfig` of this evaluation (defaults when
        none was given).
        """
        if self.config is None:
            return EvalConfig()
        if not isinstance(self.config, EvalConfig):
            raise ImproperlyConfigured('%s.config must be an EvalConfig, got %r'
                                       % (self.__class__.__name__, self.config))
        return self.config


class SamplingMixin(ConfigMixin):
    """
    Draws the frame pairs of a scene.
    """

    def get_pairs(self, seq):
        config = self.get_config()
        return sample_pairs(seq, config.m, config.seed)


class MatchingMixin(ConfigMixin):
    """
    Matches each frame once and pairs up the matches of two frames.
    """

    def get_frame_match(self, seq, position):
        cache = self.__dict__.setdefault('_match_cache', {})
        key = (seq.scene_id, position)
        if key not in cache:
            cache[key] = match_frame(seq[position], self.get_config())
        return cache[key]

    def clear_matches(self):
        self.__dict__.pop('_match_cache', None)

    def get_instance_pairs(self, seq, sample):
        """
        Returns ``(matched, one_sided)`` for the frames of ``sample``.
        """
        frame_t, frame_tk = seq[sample.anchor], seq[sample.target]
        match_t = self.get_frame_match(seq, sample.anchor)
        match_tk = self.get_frame_match(seq, sample.target)
        return (associate_pair(frame_t, frame_tk, match_t, match_tk),
                find_one_sided(frame_t, frame_tk, match_t, match_tk))


class StabilityMixin(SamplingMixin, MatchingMixin):
    """
    Scores every instance of every sampled pair of a scene.
    """

    def get_instances(self, seq, sample):
        config = self.get_config()
        matched, one_sided = self.get_instance_pairs(seq, sample)
        instances = [instance_stability(pair, config) for pair in matched]
        instances.extend(one_sided_stability(item, config) for item in one_sided)
        return instances

    def evaluate_scene(self, seq):
        config = self.get_config()
        try:
            samples = self.get_pairs(seq)
        except SequenceTooShort as e:
            logger.warning('Skipping scene %s: %s', seq.scene_id, e,
                           extra={'scene_id': seq.scene_id, 'length': len(seq), 'm': config.m})
            return SceneResult(scene_id=seq.scene_id, skipped=True)
        result = SceneResult(scene_id=seq.scene_id, pair_count=len(samples))
        try:
            for sample in samples:
                result.instances.extend(self.get_instances(seq, sample))
        finally:
            self.clear_matches()
        logger.info('Scene %s: %d pairs, %d instances', seq.scene_id, result.pair_count, len(result.instances),
                    extra={'scene_id': seq.scene_id})
        return result

    def get_stability_report(self, results):
        instances = []
        for result in results:
            instances.extend(result.instances)
        pair_count = sum(result.pair_count for result in results)
        skipped = sum(1 for result in results if result.skipped)
        if not pair_count:
            raise NoEvaluablePairs('No evaluable frame pairs: %d scenes, %d skipped as shorter than M + 1 = %d'
                                   % (len(results), skipped, self.get_config().m + 1))
        return aggregate(instances, pair_count=pair_count, skipped_scene_count=skipped, config=self.get_config())


class PrecisionMixin(ConfigMixin):
    """
    Chamfer AP over every frame of every scene.
    """
    include_precision = True

    def get_precision_report(self, sequences):
        if not self.include_precision:
            return None
        config = self.get_config()
        frames = [frame for seq in sequences for frame in seq]
        return chamfer_ap(frames, config.ap_thresholds, config)


def evaluate_scene(evaluation_class, initkwargs, seq):
    return evaluation_class(**initkwargs).evaluate_scene(seq)


class StabilityEvaluation(StabilityMixin, PrecisionMixin):
    """
    Runs the full evaluation over a list of :class:`SequenceView` objects.
    Scenes are independent; with ``config.workers > 1`` they are spread
    over a process pool and merged back in scene order.
    """
    sequences = None

    def __init__(self, **kwargs):
        for key, value in kwargs.items():
            setattr(self, key, value)

    @classonlymethod
    def as_evaluator(cls, **initkwargs):
        """
        Returns a function taking a list of sequences and returning an
        :class:`EvaluationResult`.
        """
        for key in initkwargs:
            if not hasattr(cls, key):
                raise TypeError("%s() received an invalid keyword %r. as_evaluator "
                                "only accepts arguments that are already "
                                "attributes of the class." % (cls.__name__, key))

        def evaluator(sequences):
            self = cls(**initkwargs)
            self.sequences = sequences
            return self.evaluate()

        update_wrapper(evaluator, cls, updated=())
        return evaluator

    def get_sequences(self):
        if self.sequences is None:
            raise ImproperlyConfigured('%s has no sequences to evaluate' % self.__class__.__name__)
        return sorted(self.sequences, key=lambda seq: seq.scene_id)

    def get_initkwargs(self):
        return {'config': self.get_config(), 'include_precision': self.include_precision}

    def get_scene_results(self, sequences):
        workers = self.get_config().workers
        if workers <= 1 or len(sequences) <= 1:
            return [self.evaluate_scene(seq) for seq in sequences]
        with ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(evaluate_scene, repeat(self.__class__), repeat(self.get_initkwargs()),
                                     sequences))

    def evaluate(self):
        sequences = self.get_sequences()
        results = self.get_scene_results(sequences)
        return EvaluationResult(stability=self.get_stability_report(results),
                                precision=self.get_precision_report(sequences))


def evaluate_sequences(sequences, config=None, **kwargs):
    return StabilityEvaluation.as_evaluator(config=config, **kwargs)(sequences)


def run_eval(pred_path, gt_path=None, config=None):
    """
    Evaluate a combined sequence file (``gt_path`` is ``None``) or a
    prediction/ground truth file pair. Returns the report document.
    """
    config = config or EvalConfig()
    sequences = load_inputs(pred_path, gt_path)
    result = evaluate_sequences(sequences, config)
    paths = [pred_path] if gt_path is None else [pred_path, gt_path]
    return build_report(result.stability, result.precision, config, paths)
