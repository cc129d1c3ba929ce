"""
The ``map-stability`` command.

Exit status: 0 on success, 1 on a usage or configuration error, 2 when an
input file fails validation, 3 when no frame pair could be evaluated.
"""
import argparse
import json
import logging
import os
import sys

from pyramid.paster import setup_logging

import map_stability
from map_stability.config import build_config, build_scenario, build_perturbation
from map_stability.evaluation import run_eval, evaluate_sequences
from map_stability.formats import (
    dumps_report, format_table, write_sequences, emit_plot_data, build_report, PLOT_KINDS,
)
from map_stability.forms import EvalConfigForm, PerturbationForm
from map_stability.synthgen import generate_corpus
from map_stability.utils import ImproperlyConfigured, InvalidSequenceFile, InvalidGeometry, NoEvaluablePairs

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID_INPUT = 2
EXIT_NO_PAIRS = 3

#: Command line flags overriding ``[stability]`` settings
EVAL_FLAGS = (
    ('--seed', 'seed', int),
    ('--m', 'm', int),
    ('--tau', 'tau', float),
    ('--beta', 'beta', float),
    ('--omega', 'omega', float),
    ('--n-samples', 'n_samples', int),
    ('--match-gate', 'match_gate', float),
    ('--loc-map', 'loc_map', str),
    ('--workers', 'workers', int),
)

#: Command line flags overriding ``[scenario]`` and ``[perturbation]`` settings
SCENARIO_FLAGS = (
    ('--kind', 'kind', str),
    ('--scenes', 'scenes', int),
    ('--length', 'length', int),
)
PERTURBATION_FLAGS = (
    ('--flicker-prob', 'flicker_prob', float),
    ('--jitter-sigma', 'jitter_sigma', float),
    ('--jitter-mode', 'jitter_mode', str),
    ('--shape-noise', 'shape_noise', float),
    ('--dropout-prob', 'dropout_prob', float),
    ('--score-base', 'score_base', float),
    ('--lateral-bias', 'lateral_bias', float),
    ('--drift-sigma', 'drift_sigma', float),
)


class UsageError(ImproperlyConfigured):
    pass


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError('%s: %s' % (self.prog, message))


def add_flags(parser, flags):
    for flag, dest, kind in flags:
        parser.add_argument(flag, dest=dest, type=kind, default=None)


def collect(args, flags):
    return dict((dest, getattr(args, dest, None)) for _, dest, _ in flags)


def get_parser(prog='map-stability'):
    parser = ArgumentParser(prog=prog, description='Temporal stability evaluation for vectorized map predictions')
    parser.add_argument('--version', action='version', version='%(prog)s ' + map_stability.__version__)
    parser.add_argument('-v', '--verbose', action='store_true', help='log progress when no config is given')
    commands = parser.add_subparsers(dest='command', parser_class=ArgumentParser)
    commands.required = True

    command = commands.add_parser('eval', help='evaluate a sequence file (or a prediction/ground truth pair)')
    command.add_argument('--pred', required=True, help='combined or prediction-only sequence file')
    command.add_argument('--gt', help='ground truth sequence file (split mode)')
    command.add_argument('--config', help='ini file with a [stability] section')
    command.add_argument('--out', help='write the output here instead of stdout')
    command.add_argument('--format', choices=('human', 'machine'), default='machine')
    command.add_argument('--label', help='label stored in the report, used by plot-data')
    add_flags(command, EVAL_FLAGS)
    command.set_defaults(handler=eval_command)

    command = commands.add_parser('gen', help='write a synthetic sequence file')
    command.add_argument('--config', help='ini file with [scenario] and [perturbation] sections')
    command.add_argument('--out', required=True, help='combined sequence file, or predictions with --gt-out')
    command.add_argument('--gt-out', help='write ground truth to this file and predictions only to --out')
    command.add_argument('--seed', type=int, default=0)
    add_flags(command, SCENARIO_FLAGS + PERTURBATION_FLAGS)
    command.set_defaults(handler=gen_command)

    command = commands.add_parser('sweep', help='evaluate over a grid of one setting')
    target = command.add_mutually_exclusive_group(required=True)
    target.add_argument('--param', help='a [stability] setting swept over one input')
    target.add_argument('--knob', help='a [perturbation] setting swept over regenerated synthetic data')
    command.add_argument('--values', nargs='+', required=True)
    command.add_argument('--pred', help='input for --param sweeps')
    command.add_argument('--gt')
    command.add_argument('--config')
    command.add_argument('--out')
    add_flags(command, EVAL_FLAGS + SCENARIO_FLAGS)
    command.set_defaults(handler=sweep_command)

    command = commands.add_parser('plot-data', help='tabulate reports for plotting')
    command.add_argument('kind', help='one of %s' % ', '.join(PLOT_KINDS))
    command.add_argument('reports', nargs='+', help='report or sweep documents')
    command.add_argument('--out')
    command.set_defaults(handler=plot_data_command)
    return parser


def write_output(path, text):
    if path:
        with open(path, 'w') as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def eval_command(args):
    config = build_config(args.config, collect(args, EVAL_FLAGS))
    document = run_eval(args.pred, args.gt, config)
    if args.label:
        document['label'] = args.label
    text = format_table(document) if args.format == 'human' else dumps_report(document)
    write_output(args.out, text)
    return EXIT_OK


def gen_command(args):
    factory, scenes = build_scenario(args.config, collect(args, SCENARIO_FLAGS))
    pert = build_perturbation(args.config, collect(args, PERTURBATION_FLAGS))
    sequences = generate_corpus(factory, pert, scenes, seed=args.seed)
    if args.gt_out:
        write_sequences(args.out, sequences, include='predictions')
        write_sequences(args.gt_out, sequences, include='ground_truth')
    else:
        write_sequences(args.out, sequences)
    logger.info('Wrote %d scenes to %s', len(sequences), args.out)
    return EXIT_OK


def sweep_command(args):
    overrides = collect(args, EVAL_FLAGS)
    reports = []
    if args.param:
        if args.param not in EvalConfigForm():
            raise UsageError('Unknown [stability] setting %r' % args.param)
        if not args.pred:
            raise UsageError('--param sweeps need --pred')
        for value in args.values:
            config = build_config(args.config, dict(overrides, **{args.param: value}))
            document = run_eval(args.pred, args.gt, config)
            document['label'] = '%s=%s' % (args.param, value)
            reports.append(document)
    else:
        if args.knob not in PerturbationForm():
            raise UsageError('Unknown [perturbation] setting %r' % args.knob)
        config = build_config(args.config, overrides)
        factory, scenes = build_scenario(args.config, collect(args, SCENARIO_FLAGS))
        for value in args.values:
            pert = build_perturbation(args.config, {args.knob: value})
            sequences = generate_corpus(factory, pert, scenes, seed=config.seed)
            result = evaluate_sequences(sequences, config)
            document = build_report(result.stability, result.precision, config)
            document['label'] = '%s=%s' % (args.knob, value)
            reports.append(document)
    sweep = {'sweep': args.param or args.knob, 'values': list(args.values), 'reports': reports}
    write_output(args.out, json.dumps(sweep, sort_keys=True, indent=2) + '\n')
    return EXIT_OK


def read_reports(paths):
    reports = []
    for path in paths:
        with open(path, 'r') as handle:
            try:
                document = json.load(handle)
            except ValueError as e:
                raise InvalidSequenceFile('malformed JSON (%s)' % e, path=path)
        if 'reports' in document:
            reports.extend(document['reports'])
        elif 'stability' in document:
            reports.append(document)
        else:
            raise InvalidSequenceFile('neither a report nor a sweep document', path=path)
    return reports


def plot_data_command(args):
    if args.kind not in PLOT_KINDS:
        raise UsageError('Unknown plot kind %r, expected one of %s' % (args.kind, ', '.join(PLOT_KINDS)))
    reports = read_reports(args.reports)
    if args.out:
        with open(args.out, 'w') as handle:
            emit_plot_data(reports, args.kind, handle)
    else:
        emit_plot_data(reports, args.kind, sys.stdout)
    return EXIT_OK


def configure_logging(args):
    config_uri = getattr(args, 'config', None)
    if config_uri:
        setup_logging(config_uri)
    else:
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format='%(levelname)-5.5s [%(name)s] %(message)s')


def main(argv=sys.argv):
    parser = get_parser(os.path.basename(argv[0]) if argv else 'map-stability')
    try:
        args = parser.parse_args(argv[1:])
        configure_logging(args)
        return args.handler(args)
    except ImproperlyConfigured as e:
        sys.stderr.write('error: %s\n' % e)
        return EXIT_USAGE
    except (InvalidSequenceFile, InvalidGeometry, OSError) as e:
        sys.stderr.write('invalid input: %s\n' % e)
        return EXIT_INVALID_INPUT
    except NoEvaluablePairs as e:
        sys.stderr.write('error: %s\n' % e)
        return EXIT_NO_PAIRS


def console_main():
    sys.exit(main())
