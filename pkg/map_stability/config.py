"""
Evaluation configuration.

Settings are resolved in three layers: the defaults below, the
``[stability]`` section of an ini file, and command line overrides. The
raw strings of the last two layers are validated by
:class:`map_stability.forms.EvalConfigForm`.
"""
import logging
from dataclasses import dataclass, field, asdict, replace

import plaster
from webob.multidict import MultiDict

from map_stability.geometry import PerceptionRange
from map_stability.utils import ImproperlyConfigured

logger = logging.getLogger(__name__)

SETTINGS_SECTION = 'stability'
SCENARIO_SECTION = 'scenario'
PERTURBATION_SECTION = 'perturbation'
LOC_MAPS = ('linear', 'exp')


@dataclass(frozen=True)
class EvalConfig(object):
    """All pipeline hyperparameters of one evaluation run"""
    m: int = 2
    n_samples: int = 100
    tau: float = 0.3
    beta: float = 15.0
    omega: float = 0.7
    range: PerceptionRange = field(default_factory=PerceptionRange)
    match_gate: float = 5.0
    seed: int = 0
    loc_map: str = 'linear'
    chamfer_resolution: int = None
    ap_thresholds: tuple = (0.5, 1.0, 1.5)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'ap_thresholds', tuple(float(t) for t in self.ap_thresholds))
        problems = []
        if not 0.0 <= self.tau <= 1.0:
            problems.append('tau must lie in [0, 1]')
        if not 0.0 <= self.omega <= 1.0:
            problems.append('omega must lie in [0, 1]')
        if not self.beta > 0:
            problems.append('beta must be positive')
        if self.n_samples < 2:
            problems.append('n_samples must be at least 2')
        if self.m < 1:
            problems.append('m must be at least 1')
        if not self.match_gate > 0:
            problems.append('match_gate must be positive')
        if self.loc_map not in LOC_MAPS:
            problems.append('loc_map must be one of %s' % ', '.join(LOC_MAPS))
        if self.chamfer_resolution is not None and self.chamfer_resolution < 2:
            problems.append('chamfer_resolution must be at least 2')
        if not self.ap_thresholds or any(t <= 0 for t in self.ap_thresholds) or \
                list(self.ap_thresholds) != sorted(self.ap_thresholds):
            problems.append('ap_thresholds must be positive and ascending')
        if self.workers < 1:
            problems.append('workers must be at least 1')
        if problems:
            raise ImproperlyConfigured('; '.join(problems))

    def get_chamfer_resolution(self):
        """Densification resolution for Chamfer costs (defaults to ``n_samples``)"""
        return self.chamfer_resolution or self.n_samples

    def replace(self, **changes):
        return replace(self, **changes)

    def as_dict(self):
        data = asdict(self)
        data['ap_thresholds'] = list(self.ap_thresholds)
        return data


def read_settings(config_uri, section=SETTINGS_SECTION):
    """
    Returns the raw key/value settings of ``section`` in ``config_uri``, or
    an empty dict when no config file was given.
    """
    if not config_uri:
        return {}
    settings = plaster.get_settings(config_uri, section)
    logger.debug('Loaded %d settings from [%s] of %s', len(settings), section, config_uri)
    return dict(settings)


def merge_settings(settings, overrides):
    """Returns ``settings`` updated with every override that is not ``None``"""
    merged = MultiDict()
    for key, value in (settings or {}).items():
        merged[key] = str(value)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = str(value)
    return merged


def validate_settings(form_class, config_uri=None, section=SETTINGS_SECTION, overrides=None):
    """
    Returns a validated ``form_class`` instance bound to the settings of
    ``section`` merged with ``overrides``.

    Raises ``ImproperlyConfigured`` (with the form errors attached) when a
    setting fails validation.
    """
    formdata = merge_settings(read_settings(config_uri, section), overrides)
    form = form_class(formdata=formdata)
    if not form.validate():
        raise ImproperlyConfigured('Invalid [%s] settings: %s' % (section, describe_errors(form.errors)),
                                   errors=form.errors)
    return form


def build_config(config_uri=None, overrides=None):
    """
    Resolve an :class:`EvalConfig` from an ini file and CLI overrides.
    """
    from map_stability.forms import EvalConfigForm
    return validate_settings(EvalConfigForm, config_uri, SETTINGS_SECTION, overrides).get_config()


def build_scenario(config_uri=None, overrides=None):
    """Returns the ``(factory, scene_count)`` of the ``[scenario]`` section"""
    from map_stability.forms import ScenarioForm
    form = validate_settings(ScenarioForm, config_uri, SCENARIO_SECTION, overrides)
    return form.get_factory(), form.get_scene_count()


def build_perturbation(config_uri=None, overrides=None):
    from map_stability.forms import PerturbationForm
    return validate_settings(PerturbationForm, config_uri, PERTURBATION_SECTION, overrides).get_perturbation()


def describe_errors(errors):
    parts = []
    for name in sorted(errors):
        parts.append('%s: %s' % (name, '; '.join(str(message) for message in errors[name])))
    return ', '.join(parts)
