"""
wtforms forms validating raw string settings (ini sections merged with
command line flags) into typed configuration objects.
"""
from functools import partial

from pyramid.settings import aslist, asbool
from wtforms import Form, Field, IntegerField, FloatField, SelectField, ValidationError
from wtforms.validators import NumberRange, Optional

from map_stability.config import EvalConfig, LOC_MAPS
from map_stability.geometry import PerceptionRange
from map_stability.synthgen import PerturbationSpec, straight_scenario, arc_scenario


class ListField(Field):
    """A whitespace or comma separated list, split with ``aslist``"""
    coerce = str

    def __init__(self, label=None, validators=None, coerce=None, **kwargs):
        super(ListField, self).__init__(label, validators, **kwargs)
        if coerce is not None:
            self.coerce = coerce

    def _value(self):
        return ' '.join(str(v) for v in self.data or ())

    def process_formdata(self, valuelist):
        if not valuelist:
            return
        values = []
        for raw in valuelist:
            values.extend(aslist(raw.replace(',', ' ')))
        try:
            self.data = tuple(self.coerce(v) for v in values)
        except ValueError:
            self.data = None
            raise ValueError(self.gettext('Not a valid list of values'))


class FlagField(Field):
    """A boolean setting, parsed with ``asbool``"""

    def _value(self):
        return 'true' if self.data else 'false'

    def process_formdata(self, valuelist):
        if valuelist:
            self.data = asbool(valuelist[0])


class EvalConfigForm(Form):
    m = IntegerField(default=2, validators=[NumberRange(min=1)])
    n_samples = IntegerField(default=100, validators=[NumberRange(min=2)])
    tau = FloatField(default=0.3, validators=[NumberRange(min=0.0, max=1.0)])
    beta = FloatField(default=15.0, validators=[NumberRange(min=0.0)])
    omega = FloatField(default=0.7, validators=[NumberRange(min=0.0, max=1.0)])
    x_min = FloatField(default=-15.0)
    x_max = FloatField(default=15.0)
    y_min = FloatField(default=-30.0)
    y_max = FloatField(default=30.0)
    match_gate = FloatField(default=5.0, validators=[NumberRange(min=0.0)])
    seed = IntegerField(default=0, validators=[NumberRange(min=0)])
    loc_map = SelectField(default='linear', choices=[(name, name) for name in LOC_MAPS])
    chamfer_resolution = IntegerField(validators=[Optional(), NumberRange(min=2)])
    ap_thresholds = ListField(default=(0.5, 1.0, 1.5), coerce=float)
    workers = IntegerField(default=1, validators=[NumberRange(min=1)])

    def validate_beta(self, field):
        if field.data is not None and field.data <= 0:
            raise ValidationError('Must be positive.')

    def validate_match_gate(self, field):
        if field.data is not None and field.data <= 0:
            raise ValidationError('Must be positive.')

    def validate_x_max(self, field):
        if self.x_min.data is not None and field.data is not None and field.data <= self.x_min.data:
            raise ValidationError('Must be greater than x_min.')

    def validate_y_max(self, field):
        if self.y_min.data is not None and field.data is not None and field.data <= self.y_min.data:
            raise ValidationError('Must be greater than y_min.')

    def validate_ap_thresholds(self, field):
        thresholds = field.data or ()
        if not thresholds:
            raise ValidationError('At least one threshold is required.')
        if any(t <= 0 for t in thresholds) or list(thresholds) != sorted(thresholds):
            raise ValidationError('Thresholds must be positive and ascending.')

    def get_range(self):
        return PerceptionRange(x_min=self.x_min.data, x_max=self.x_max.data,
                               y_min=self.y_min.data, y_max=self.y_max.data)

    def get_config(self):
        """
        Returns the :class:`EvalConfig` described by a validated form.
        """
        return EvalConfig(
            m=self.m.data,
            n_samples=self.n_samples.data,
            tau=self.tau.data,
            beta=self.beta.data,
            omega=self.omega.data,
            range=self.get_range(),
            match_gate=self.match_gate.data,
            seed=self.seed.data,
            loc_map=self.loc_map.data,
            chamfer_resolution=self.chamfer_resolution.data,
            ap_thresholds=self.ap_thresholds.data,
            workers=self.workers.data,
        )


class ScenarioForm(Form):
    kind = SelectField(default='straight', choices=[('straight', 'straight'), ('arc', 'arc')])
    length = IntegerField(default=50, validators=[NumberRange(min=2)])
    speed = FloatField(default=1.0, validators=[NumberRange(min=0.01)])
    radius = FloatField(default=100.0, validators=[NumberRange(min=20.0)])
    scenes = IntegerField(default=20, validators=[NumberRange(min=1)])
    crosswalks = FlagField(default=True)

    def get_factory(self):
        """
        Returns a scenario factory taking ``seed`` and ``scene_id``.
        """
        if self.kind.data == 'arc':
            return partial(arc_scenario, length=self.length.data, radius=self.radius.data, speed=self.speed.data)
        return partial(straight_scenario, length=self.length.data, speed=self.speed.data,
                       crosswalks=self.crosswalks.data)

    def get_scene_count(self):
        return self.scenes.data


class PerturbationForm(Form):
    flicker_prob = FloatField(default=0.0, validators=[NumberRange(min=0.0, max=1.0)])
    jitter_sigma = FloatField(default=0.0, validators=[NumberRange(min=0.0)])
    jitter_mode = SelectField(default='rigid', choices=[('rigid', 'rigid'), ('vertex', 'vertex')])
    shape_noise = FloatField(default=0.0, validators=[NumberRange(min=0.0)])
    dropout_prob = FloatField(default=0.0, validators=[NumberRange(min=0.0, max=1.0)])
    score_base = FloatField(default=1.0, validators=[NumberRange(min=0.0, max=1.0)])
    flicker_score = FloatField(default=0.05, validators=[NumberRange(min=0.0, max=1.0)])
    lateral_bias = FloatField(default=0.0)
    drift_sigma = FloatField(default=0.0, validators=[NumberRange(min=0.0)])
    drift_corr = FloatField(default=0.7, validators=[NumberRange(min=0.0, max=1.0)])
    classes = ListField()

    def get_perturbation(self):
        return PerturbationSpec(
            flicker_prob=self.flicker_prob.data,
            jitter_sigma=self.jitter_sigma.data,
            jitter_mode=self.jitter_mode.data,
            shape_noise=self.shape_noise.data,
            dropout_prob=self.dropout_prob.data,
            score_base=self.score_base.data,
            flicker_score=self.flicker_score.data,
            lateral_bias=self.lateral_bias.data,
            drift_sigma=self.drift_sigma.data,
            drift_corr=self.drift_corr.data,
            classes=self.classes.data or None,
        )
