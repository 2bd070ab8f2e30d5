import argparse
import logging
import os
import sys
import time
from typing import List, Optional
import warnings
from parsimax import report
from parsimax.core import Estimator, GhmPairing, SamplerPolicy, run_max_test
from parsimax.exc import DataError, NumericalError, ParsimaxError, StageFailure
from parsimax.harness import (
    consistency_experiment, pd_failure_census, power_curve, power_experiment, size_experiment,
    verify_identities,
)
from parsimax.ingest import ingest_csv
from parsimax.settings import (
    COMMANDS, DEFAULT_ALPHA, DEFAULT_DRAWS, DEFAULT_SEED, EXPERIMENT_COMMANDS, RunSpec,
    load_experiment_file,
)


EXIT_OK = 0
EXIT_DATA_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


def _columns(value: str) -> List[str]:
    return [name.strip() for name in value.split(',') if name.strip()]


class CommandLineHandler:
    def __init__(self, argv=None):
        self.argv = argv if argv is not None else sys.argv[1:]

    def parser(self) -> argparse.ArgumentParser:
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument(
            '--draws',
            type=int,
            help=f'Simulation draws M for the p-value - defaults to {DEFAULT_DRAWS}')
        common.add_argument(
            '--seed',
            type=int,
            help=f'Master seed - defaults to {DEFAULT_SEED}')
        common.add_argument(
            '--estimator',
            choices=[e.value for e in Estimator],
            help='Covariance estimator - defaults to restricted_closed_form')
        common.add_argument(
            '--alpha',
            type=float,
            help=f'Significance level - defaults to {DEFAULT_ALPHA}')
        common.add_argument(
            '--sampler',
            choices=[s.value for s in SamplerPolicy],
            help='How normal draws are correlated - defaults to cholesky_then_eigen')
        common.add_argument(
            '--ghm-pairing',
            choices=[g.value for g in GhmPairing],
            default=GhmPairing.SQUARED_OWN.value,
            help='Residual weights of the GHM estimator - defaults to %(default)s')
        common.add_argument(
            '--plus-one',
            action='store_true',
            help='Report (1 + exceedances) / (M + 1) instead of exceedances / M')
        common.add_argument(
            '--config',
            metavar='PATH',
            help='JSON experiment file for the simulation commands')
        common.add_argument(
            '--replications',
            type=int,
            help='Monte Carlo replications - overrides the experiment file')
        common.add_argument(
            '--output',
            metavar='PATH',
            help='Write the JSON document here instead of standard output')
        common.add_argument(
            '--timings',
            action='store_true',
            help='Include wall-clock timings in the diagnostics (output is then not reproducible)')
        common.add_argument(
            '-v',
            action='store_true',
            help='Verbose output')

        parser = argparse.ArgumentParser(
            prog='parsimax',
            formatter_class=argparse.RawDescriptionHelpFormatter,
            description='Max test of b = 0 through parsimonious regressions, with its simulation harness')
        commands = parser.add_subparsers(dest='command', metavar='COMMAND', required=True)

        test = commands.add_parser('test', parents=[common], help='Run the max test on a CSV file')
        test.add_argument('--input', required=True, metavar='PATH', help='CSV file with a header row')
        test.add_argument('--y', required=True, metavar='COLUMN', help='Dependent variable')
        test.add_argument('--z', required=True, type=_columns, metavar='COLUMNS',
                          help='Comma-separated protected regressors (include your constant column)')
        test.add_argument('--x', required=True, type=_columns, metavar='COLUMNS',
                          help='Comma-separated key regressors under test')

        helps = {
            'size': 'Rejection rate under b = 0',
            'power': 'Rejection rate under the configured b (or along b_grid)',
            'consistency': 'Distance of the estimators to the exact V as n grows',
            'census': 'How often each estimator is not positive definite',
            'verify-identities': 'Check the exact-moment identities of V',
        }
        for name in COMMANDS[1:]:
            commands.add_parser(name, parents=[common], help=helps[name])
        return parser

    def execute(self) -> int:
        args = self.parser().parse_args(self.argv)
        setup_logging(logging.DEBUG if args.v else logging.INFO)

        try:
            plan = self.run_spec(args)
            doc, exit_code = self.run(plan, args.timings)
        except ParsimaxError as err:
            return fail(err)

        text = report.render(doc)
        if args.output:
            with open(args.output, 'w', encoding='utf-8') as out:
                out.write(text)
            logging.info(f'Wrote {args.output}')
        else:
            sys.stdout.write(text)
        return exit_code

    def run_spec(self, args: argparse.Namespace) -> RunSpec:
        experiment = load_experiment_file(args.config)
        from_file = args.command in EXPERIMENT_COMMANDS

        def pick(flag, file_value, default):
            if flag is not None:
                return flag
            return file_value if from_file else default

        return RunSpec(
            command=args.command,
            input_path=getattr(args, 'input', None),
            y_column=getattr(args, 'y', None),
            z_columns=tuple(getattr(args, 'z', None) or ()),
            x_columns=tuple(getattr(args, 'x', None) or ()),
            draws=pick(args.draws, experiment.draws, DEFAULT_DRAWS),
            seed=DEFAULT_SEED if args.seed is None else args.seed,
            estimator=Estimator(pick(args.estimator, experiment.estimator.value,
                                     Estimator.RESTRICTED_CLOSED_FORM.value)),
            sampler=SamplerPolicy(pick(args.sampler, experiment.sampler.value,
                                       SamplerPolicy.CHOLESKY_THEN_EIGEN.value)),
            alpha=pick(args.alpha, experiment.alpha, DEFAULT_ALPHA),
            plus_one=args.plus_one,
            ghm_pairing=GhmPairing(args.ghm_pairing),
            replications=experiment.replications if args.replications is None else args.replications,
            experiment=experiment,
        )

    def run(self, plan: RunSpec, with_timings: bool = False):
        started = time.monotonic()
        command = plan.command
        exit_code = EXIT_OK
        sampler_used = None
        pd_certificate = None
        timings = {}

        if command == 'test':
            d = ingest_csv(plan.input_path, plan.y_column, plan.z_columns, plan.x_columns)
            timings['ingest'] = time.monotonic() - started
            result = run_max_test(d, plan.test_config(), plan.workers)
            body = report.max_test_result(result, plan.alpha)
            sampler_used = result.sampler_used.value
            pd_certificate = report.certificate(result.covariance.certificate)
        elif command == 'verify-identities':
            identities = verify_identities(seed=plan.seed)
            body = report.identity_result(identities)
            timings.update(identities.timings)
            if not identities.passed:
                exit_code = EXIT_NUMERICAL_ERROR
        else:
            body, sampler_used = self.run_experiment(plan)

        timings['total'] = time.monotonic() - started
        logging.info(f'{command} finished in {timings["total"]:.2f}s')
        doc = report.document(command, plan.echo(), body, sampler_used, pd_certificate,
                              timings if with_timings else None)
        return doc, exit_code

    def run_experiment(self, plan: RunSpec):
        cfg = plan.dgp_config()
        test_cfg = plan.test_config()
        experiment = plan.experiment
        command = plan.command

        if command == 'size':
            outcome = size_experiment(cfg, test_cfg, plan.replications, plan.alpha,
                                      experiment.include_wald, plan.workers)
        elif command == 'power' and experiment.b_grid:
            curve = power_curve(cfg, test_cfg, 0, experiment.b_grid, plan.replications,
                                plan.alpha, plan.workers)
            body = [{'b': value, **report.experiment_result(r)} for value, r in curve]
            return body, [r.sampler_counts for _, r in curve]
        elif command == 'power':
            outcome = power_experiment(cfg, test_cfg, plan.replications, plan.alpha,
                                       experiment.include_wald, plan.workers)
        elif command == 'consistency':
            outcome = consistency_experiment(cfg, experiment.n_grid, plan.replications, plan.workers)
        else:
            outcome = pd_failure_census(cfg, plan.replications, plan.workers)
        return report.experiment_result(outcome), outcome.sampler_counts or None


def exit_code_for(err: ParsimaxError) -> int:
    if isinstance(err, StageFailure):
        return exit_code_for(err.cause)
    if isinstance(err, NumericalError):
        return EXIT_NUMERICAL_ERROR
    if isinstance(err, DataError):
        return EXIT_DATA_ERROR
    return EXIT_NUMERICAL_ERROR


def fail(err: ParsimaxError) -> int:
    code = exit_code_for(err)
    logging.error(str(err))
    sys.stderr.write(report.render(report.error_object(err, code)))
    return code


def setup_logging(level):
    debug = os.environ.get('DEBUG')
    if debug:
        level = logging.DEBUG
        warnings.simplefilter('always')

    logging.basicConfig(
        stream=sys.stderr,
        datefmt='%Y-%m-%d %H:%M:%S',
        format='%(asctime)s %(levelname)-8s %(message)s',
        level=level
    )


def main(argv: Optional[List[str]] = None) -> int:
    cli = CommandLineHandler(argv)
    return cli.execute()


if __name__ == '__main__':
    sys.exit(main())
