"""Command-line front end.

Subcommands: ``test`` (run the rank test on a CSV), ``simulate`` (write
a synthetic dataset), ``power-study`` (Monte Carlo rejection rates) and
``rain`` (week-resampling experiment on daily two-city data).

Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.
stdout carries only the report; diagnostics go to stderr.
"""

import argparse
import io
import os
import sys

from .data import group_city_weeks, load_csv, load_rainfall_csv, write_csv
from .errors import DataError, NumericError
from .rank_test import TestConfig, run_test
from .simulate import ScenarioConfig, simulate_dataset
from .study import StudyConfig, power_study, rainfall_study

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def _methods(text):
    return tuple(m.strip() for m in text.split(",") if m.strip())


def _build_parser():
    parser = _Parser(prog="mrctest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_test = sub.add_parser("test", help="run the rank test on a CSV dataset")
    p_test.add_argument("--input", required=True)
    p_test.add_argument("--outcome", required=True)
    p_test.add_argument("--id", required=True, dest="id_col")
    p_test.add_argument("--covariates", required=True, nargs="+")
    p_test.add_argument("--time", default=None)
    p_test.add_argument("--b", type=_positive_int, default=200, help="resample count")
    p_test.add_argument("--q", type=_positive_int, default=10, help="max bandwidth iterations")
    p_test.add_argument("--seed", type=int, default=0)
    p_test.add_argument("--h-mult", type=_positive_float, default=1.0)
    p_test.add_argument("--format", choices=("json", "tsv"), default="json")
    p_test.add_argument("--threads", type=_positive_int, default=None)

    p_sim = sub.add_parser("simulate", help="write a synthetic dataset as CSV")
    p_sim.add_argument("--scenario", type=int, choices=(1, 2), default=1)
    p_sim.add_argument("--n", type=_positive_int, required=True)
    p_sim.add_argument("--beta1", type=float, default=0.0)
    p_sim.add_argument("--gamma1", type=float, default=0.0)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", default=None, help="output path (default stdout)")

    p_pow = sub.add_parser("power-study", help="Monte Carlo power / type-I error")
    p_pow.add_argument("--scenario", type=int, choices=(1, 2), default=1)
    p_pow.add_argument("--n", type=_positive_int, required=True)
    p_pow.add_argument("--beta1", type=float, default=0.0)
    p_pow.add_argument("--gamma1", type=float, default=0.0)
    p_pow.add_argument("--reps", type=_positive_int, default=200)
    p_pow.add_argument("--methods", type=_methods, default=("rank", "tobit", "logistic"))
    p_pow.add_argument("--alpha", type=_positive_float, default=0.05)
    p_pow.add_argument("--b", type=_positive_int, default=101)
    p_pow.add_argument("--q", type=_positive_int, default=5)
    p_pow.add_argument("--seed", type=int, default=0)
    p_pow.add_argument("--format", choices=("json", "tsv"), default="tsv")
    p_pow.add_argument("--threads", type=_positive_int, default=None)

    p_rain = sub.add_parser("rain", help="week-resampling experiment on daily data")
    p_rain.add_argument("--input", required=True)
    p_rain.add_argument("--id", default="city", dest="id_col")
    p_rain.add_argument("--time", default="date")
    p_rain.add_argument("--outcome", default="rain")
    p_rain.add_argument("--city-one", required=True, help="city coded as x1 = 1")
    p_rain.add_argument("--weeks", type=_positive_int, required=True)
    p_rain.add_argument("--draws", type=_positive_int, required=True)
    p_rain.add_argument("--week-len", type=_positive_int, default=7)
    p_rain.add_argument("--methods", type=_methods, default=("rank", "tobit", "logistic"))
    p_rain.add_argument("--alpha", type=_positive_float, default=0.05)
    p_rain.add_argument("--b", type=_positive_int, default=201)
    p_rain.add_argument("--q", type=_positive_int, default=5)
    p_rain.add_argument("--seed", type=int, default=0)
    p_rain.add_argument("--format", choices=("json", "tsv"), default="tsv")
    p_rain.add_argument("--threads", type=_positive_int, default=None)

    return parser


def _threads(args):
    if args.threads is not None:
        return args.threads
    return os.cpu_count() or 1


def _cmd_test(args):
    dataset = load_csv(
        args.input,
        outcome_col=args.outcome,
        id_col=args.id_col,
        covariate_cols=args.covariates,
        time_col=args.time,
    )
    cfg = TestConfig(B=args.b, Q=args.q, seed=args.seed, h_multiplier=args.h_mult)
    result = run_test(dataset, cfg, threads=_threads(args))
    if args.format == "json":
        sys.stdout.write(result.to_json() + "\n")
    else:
        out = io.StringIO()
        out.write("covariate\tbeta_hat\tp_one_sided\tp_two_sided\tci_lo\tci_hi\n")
        for k, name in enumerate(dataset.covariate_names):
            out.write(
                f"{name}\t{result.beta_hat[k]!r}\t{result.p_one_sided[k]!r}"
                f"\t{result.p_two_sided[k]!r}\t{result.ci95[k, 0]!r}\t{result.ci95[k, 1]!r}\n"
            )
        sys.stdout.write(out.getvalue())
    return EXIT_OK


def _cmd_simulate(args):
    cfg = ScenarioConfig(
        n=args.n, scenario=args.scenario, beta1=args.beta1, gamma1=args.gamma1
    )
    dataset = simulate_dataset(cfg, args.seed)
    if args.out:
        write_csv(dataset, args.out)
    else:
        write_csv(dataset, sys.stdout)
    return EXIT_OK


def _cmd_power_study(args):
    cfg = StudyConfig(
        scenario=args.scenario,
        n=args.n,
        beta1=args.beta1,
        gamma1=args.gamma1,
        reps=args.reps,
        methods=args.methods,
        alpha=args.alpha,
        seed=args.seed,
        B=args.b,
        Q=args.q,
    )
    result = power_study(cfg, threads=_threads(args))
    _emit_study(result, args.format)
    return EXIT_OK


def _cmd_rain(args):
    daily = load_rainfall_csv(
        args.input,
        id_col=args.id_col,
        time_col=args.time,
        outcome_col=args.outcome,
        city_one=args.city_one,
    )
    weekly = group_city_weeks(daily, week_len=args.week_len)
    cfg = StudyConfig(
        methods=args.methods, alpha=args.alpha, seed=args.seed, B=args.b, Q=args.q
    )
    result = rainfall_study(weekly, args.weeks, args.draws, cfg, threads=_threads(args))
    _emit_study(result, args.format)
    return EXIT_OK


def _emit_study(result, fmt):
    if fmt == "json":
        sys.stdout.write(result.to_json() + "\n")
    else:
        sys.stdout.write(result.to_tsv())


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "test": _cmd_test,
        "simulate": _cmd_simulate,
        "power-study": _cmd_power_study,
        "rain": _cmd_rain,
    }
    try:
        return handlers[args.command](args)
    except DataError as exc:
        print(f"mrctest: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"mrctest: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"mrctest: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
