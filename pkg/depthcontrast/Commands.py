__all__ = [
    'EXIT_OK',
    'EXIT_CONFIG',
    'EXIT_IO',
    'EXIT_NUMERICAL',
    'EXIT_ACCEPTANCE',
    'EXIT_INTERNAL',
    'build_parser',
    'main',
]

import argparse
import logging
import os

import colorlog

from .Config import default_data_directory, load_config
from .DepthContrast import DepthContrast
from .Exceptions import (CheckpointMismatchError, DepthContrastError, FormatError, InvalidConfigError, InvalidPathError,
    NumericalError, ProtocolLookupError, StratificationError)
from .Training.Protocols import PROTOCOL_NAMES
from .Verification import corrupted_matmul, gradient_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4
EXIT_ACCEPTANCE = 5
EXIT_INTERNAL = 6

DOWNSTREAM_MODES = {"finetune": "finetune", "linear-eval": "linear_eval"}


def configure_logging(verbose=False):
    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter("%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def _table(header, rows):
    lines = ["  ".join("{:>14}".format(str(cell)) for cell in header)]
    for row in rows:
        lines.append("  ".join("{:>14}".format("{:.4f}".format(cell) if isinstance(cell, float) else str(cell))
            for cell in row))
    return "\n".join(lines)


def _config(args, **overrides):
    overrides = {key: value for key, value in overrides.items() if value is not None}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return load_config(args.config, overrides)


def _dataset(dc, config, args, protocol="fully_supervised"):
    dataset = dc.datasets.load()
    plan = dc.datasets.folds(dataset, k=config.section("protocol")["folds"],
        seed=config.section("protocol")["fold_seed"])
    return dataset, dc.datasets.splits(plan, protocol, test_fold=args.test_fold, seed=config.seed)


def gen_data(args):
    overrides = {"generator.scale": args.scale, "generator.image_size": args.image_size}
    config = _config(args, **overrides)
    generator = config.generator_config()
    dc = DepthContrast(args.out)
    manifest = dc.datasets.generate(generator, seed=config.seed)
    dc.storage.write_bytes("generator.json", (config.to_json() + "\n").encode("utf-8"))
    print(_table(["class", "count"], list(manifest.class_counts().items())))
    return EXIT_OK


def pretrain(args):
    config = _config(args, **{"pretrain.epochs": args.epochs})
    dc = DepthContrast(args.data, DTYPE=config.dtype)
    dataset, splits = _dataset(dc, config, args)
    params, record = dc.trainer.pretrain(dataset, splits, dc.models.create(config), config,
        record_path=os.path.splitext(args.out)[0] + "-record.csv")
    if record.aborted:
        logger.error("pretraining aborted at batch %s: %s", record.abort_batch, record.abort_reason)
        return EXIT_NUMERICAL
    dc.models.save(args.out, params, config)
    print(_table(["epoch", "loss", ""], record.epoch_rows()))
    return EXIT_OK if record.finite else EXIT_NUMERICAL


def downstream(args):
    mode = DOWNSTREAM_MODES[args.command]
    config = _config(args, **{"downstream.epochs": args.epochs, "downstream.input_mode": args.input_mode})
    dc = DepthContrast(args.data, DTYPE=config.dtype)
    dataset, splits = _dataset(dc, config, args, "semi_supervised" if args.semi else "fully_supervised")
    params = dc.models.create(config) if args.init == "random" else dc.models.load(args.init, config)
    prefix = os.path.join(args.out, mode.replace("_", "-"))
    params, record = dc.trainer.downstream(mode, dataset, splits, params, config, out_prefix=prefix)
    if record.aborted:
        logger.error("%s aborted at batch %s: %s", mode, record.abort_batch, record.abort_reason)
        return EXIT_NUMERICAL
    dc.models.save(prefix + ".dckp", params, config)
    for title, report in (("train", record.train_report), ("test", record.report)):
        if report is not None:
            print("{} ({} samples)".format(title, report.count))
            print(_table(report.header(), report.to_rows()))
    if record.encoder_frozen is not None:
        print("encoder freeze check: " + ("passed" if record.encoder_frozen else "FAILED"))
    return EXIT_OK


def protocol(args):
    config = _config(args, **{"protocol.name": args.name})
    dc = DepthContrast(args.data, DTYPE=config.dtype)
    result = dc.protocols.run(config.section("protocol")["name"], dc.datasets.load(), config, out_dir=args.out)
    print(_table(["experiment", "arm", "split", "input", "mean", "std", "runs"], result.comparison_rows()))
    ordering = result.ordering()
    if ordering is not None:
        print(ordering)
    return EXIT_ACCEPTANCE if result.aborted else EXIT_OK


def gradcheck(args):
    if args.inject_fault:
        with corrupted_matmul():
            results = gradient_suite(eps=args.eps, tol=args.tol)
    else:
        results = gradient_suite(eps=args.eps, tol=args.tol)
    passed = True
    for path, report in results:
        print(path)
        print(_table(["parameter", "max_rel", "mean_rel", "checked", "skipped", "status"],
            [[row[0], "{:.3e}".format(row[1]), "{:.3e}".format(row[2])] + list(row[3:]) for row in report.to_rows()]))
        if not report.passed:
            passed = False
            logger.error("%s path: %s exceeds tolerance %.1e with %.3e", path, report.worst.name, report.tol,
                report.worst.max_rel_error)
    return EXIT_OK if passed else EXIT_ACCEPTANCE


def build_parser():
    """Builds the command-line parser of the ``depthcontrast`` command."""
    parser = argparse.ArgumentParser(prog="depthcontrast",
        description="Contrastive pretraining on paired reflectance and depth images.")
    parser.add_argument("--verbose", action="store_true", help="log debug messages")
    commands = parser.add_subparsers(dest="command", required=True)

    def common(command, data=True):
        command.add_argument("--config", default=None,
            help="a preset name (desk, paper-faithful) or the path of a YAML config")
        command.add_argument("--seed", type=int, default=None, help="override the configured seed")
        if data:
            command.add_argument("--data", default=default_data_directory(),
                help="the dataset directory (default: $DEPTHCONTRAST_DATA or ./data)")
            command.add_argument("--test-fold", type=int, default=0, help="the held-out fold")

    command = commands.add_parser("gen-data", help="render a synthetic dataset")
    common(command, data=False)
    command.add_argument("--out", default=default_data_directory(), help="the dataset directory")
    command.add_argument("--scale", type=float, default=None, help="the factor applied to the class counts")
    command.add_argument("--image-size", type=int, default=None, help="the plane size")
    command.set_defaults(handler=gen_data)

    command = commands.add_parser("pretrain", help="pretrain the encoder contrastively")
    common(command)
    command.add_argument("--out", required=True, help="the checkpoint path")
    command.add_argument("--epochs", type=int, default=None, help="override the pretraining epochs")
    command.set_defaults(handler=pretrain)

    for name in DOWNSTREAM_MODES:
        command = commands.add_parser(name, help="train a classifier on top of the encoder")
        common(command)
        command.add_argument("--init", required=True, help="a checkpoint path, or `random`")
        command.add_argument("--out", required=True, help="the output directory")
        command.add_argument("--semi", action="store_true", help="use the 10/10/20 split")
        command.add_argument("--epochs", type=int, default=None, help="override the downstream epochs")
        command.add_argument("--input-mode", choices=("raw_reflectance", "raw", "reflectance"), default=None,
            help="the classifier input composition")
        command.set_defaults(handler=downstream)

    command = commands.add_parser("protocol", help="compare pretrained and random-init arms")
    common(command)
    command.add_argument("--name", default=None, help="one of " + ", ".join(PROTOCOL_NAMES))
    command.add_argument("--out", default=None, help="the output directory")
    command.set_defaults(handler=protocol)

    command = commands.add_parser("gradcheck", help="check analytic gradients against central differences")
    command.add_argument("--scale", choices=("tiny",), default="tiny", help="the model size")
    command.add_argument("--eps", type=float, default=1e-5, help="the central-difference step")
    command.add_argument("--tol", type=float, default=1e-4, help="the largest accepted relative error")
    command.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    command.set_defaults(handler=gradcheck)
    return parser


def main(argv=None):
    """Runs the command line; returns the exit code.

    Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical abort, 5 acceptance
    failure, 6 any other package error.
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except (InvalidConfigError, ProtocolLookupError, StratificationError, CheckpointMismatchError) as error:
        logger.error("%s", error)
        return EXIT_CONFIG
    except (InvalidPathError, FormatError) as error:
        logger.error("%s", error)
        return EXIT_IO
    except NumericalError as error:
        logger.error("%s", error)
        return EXIT_NUMERICAL
    except DepthContrastError as error:
        logger.error("%s", error)
        return EXIT_INTERNAL
