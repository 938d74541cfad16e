"""Command-line pipeline: generate -> train -> evaluate / sweep / predict.

Exit codes: 0 success, 1 I/O or runtime failure, 2 usage or validation error.
Settings resolve as defaults <- ``--config`` JSON file <- flags. Logs go to
stderr; set ``CLASSICAL_LIMIT_LOG_LEVEL`` (e.g. ``DEBUG``, ``WARNING``) to change
verbosity.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from classical_limit import dataset as ds
from classical_limit import eval as ev
from classical_limit import nn, train as tr
from classical_limit.dynamics import OscillatorParams, closed_form_many
from classical_limit.validation import ValidationError

log = logging.getLogger("classical_limit")

# The experiment of the reference study lives here, as flag defaults.
PAPER_HBARS = "5.0,2.0,1.0,0.5,0.1,0.01"


class UsageError(Exception):
    """Bad flag values; maps to exit code 2."""


def _float_list(value, name):
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    items = [str(v).strip() for v in items if str(v).strip()]
    try:
        [float(v) for v in items]
    except ValueError:
        raise UsageError(f"--{name}: expected comma-separated numbers, got {value!r}") from None
    if not items:
        raise UsageError(f"--{name}: empty list")
    return items


def _int_list(value, name):
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    try:
        return [int(v) for v in items if str(v).strip()]
    except ValueError:
        raise UsageError(f"--{name}: expected comma-separated integers, got {value!r}") from None


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="classical-limit",
        description="Emulate the classical limit of the quantum harmonic oscillator with an MLP.",
        formatter_class=fmt,
    )
    parser.add_argument("--config", help="JSON file of flag values (keys are flag names with underscores)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate an Ehrenfest trajectory dataset", formatter_class=fmt)
    p.add_argument("--out", default="dataset.csv", help="dataset CSV; manifest is written alongside")
    p.add_argument("--hbars", default=PAPER_HBARS, help="comma-separated hbar values")
    p.add_argument("--num-ic", type=int, default=1000, help="initial conditions drawn per hbar")
    p.add_argument("--t-max", type=float, default=10.0, help="end of the time grid")
    p.add_argument("--t-steps", type=int, default=100, help="number of time grid points")
    p.add_argument("--ic-low", type=float, default=-2.0, help="lower bound of the initial-condition box")
    p.add_argument("--ic-high", type=float, default=2.0, help="upper bound of the initial-condition box")
    p.add_argument("--m", type=float, default=1.0, help="mass")
    p.add_argument("--omega", type=float, default=1.0, help="angular frequency")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--threads", type=int, default=1, help="integration worker threads")

    p = sub.add_parser("train", help="train the network on a dataset", formatter_class=fmt)
    p.add_argument("--data", default="dataset.csv", help="dataset CSV")
    p.add_argument("--out", default="checkpoint.json", help="checkpoint file")
    p.add_argument("--report", default=None, help="train report JSON; unset means <out stem>.report.json")
    p.add_argument("--epochs", type=int, default=100, help="training epochs")
    p.add_argument("--batch", type=int, default=32, help="mini-batch size")
    p.add_argument("--lr", type=float, default=0.001, help="Adam learning rate")
    p.add_argument("--val-frac", type=float, default=0.1, help="validation fraction per hbar stratum")
    p.add_argument("--hidden", default="64,128", help="hidden layer widths")
    p.add_argument("--seed", type=int, default=0, help="seed for init, shuffles and the split")

    p = sub.add_parser("sweep", help="hbar sweep at one initial condition (figure data)", formatter_class=fmt)
    p.add_argument("--checkpoint", default="checkpoint.json", help="trained checkpoint")
    p.add_argument("--out", default="sweep.csv", help="sweep CSV; summary JSON is written alongside")
    p.add_argument("--x0", type=float, default=1.0, help="initial <x>")
    p.add_argument("--p0", type=float, default=0.0, help="initial <p>")
    p.add_argument("--hbars", default=PAPER_HBARS, help="comma-separated hbar values")
    p.add_argument("--t-window", default=None, help="restrict to t_lo,t_hi (e.g. 2.0,4.0)")

    p = sub.add_parser("evaluate", help="held-out MSE and per-hbar RMSE vs classical", formatter_class=fmt)
    p.add_argument("--checkpoint", default="checkpoint.json", help="trained checkpoint")
    p.add_argument("--data", default="dataset.csv", help="dataset CSV")
    p.add_argument(
        "--subset", choices=("val", "train", "all"), default="val",
        help="which part of the checkpoint's split to score",
    )

    p = sub.add_parser("predict", help="print one predicted trajectory as CSV", formatter_class=fmt)
    p.add_argument("--checkpoint", default="checkpoint.json", help="trained checkpoint")
    p.add_argument("--x0", type=float, default=1.0, help="initial <x>")
    p.add_argument("--p0", type=float, default=0.0, help="initial <p>")
    p.add_argument("--hbar", type=float, default=0.01, help="hbar fed to the network")
    parser.subcommands = sub.choices
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            conf = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"--config {args.config}: malformed JSON ({exc})") from None
        if not isinstance(conf, dict):
            raise UsageError("--config must hold a JSON object")
        section = conf.get(args.command, {})
        if not isinstance(section, dict):
            raise UsageError(f"--config: section '{args.command}' must be a JSON object")
        subparser = parser.subcommands[args.command]
        known = {a.dest for a in subparser._actions} - {"help"}
        unknown = sorted(k for k in (n.replace("-", "_") for n in section) if k not in known)
        if unknown:
            raise UsageError(f"--config: unknown keys for '{args.command}': {', '.join(unknown)}")
        # flat keys apply to every subcommand that has the flag; the section overrides them
        flat = {k.replace("-", "_"): v for k, v in conf.items() if k not in parser.subcommands}
        conf = {k: v for k, v in flat.items() if k in known}
        conf.update({k.replace("-", "_"): v for k, v in section.items()})
        # rightmost wins: re-parse so explicit flags override file values
        subparser.set_defaults(**conf)
        config_path = args.config
        args = parser.parse_args(argv)
        args.config = config_path
    return args


def _setup_logging():
    level = os.environ.get("CLASSICAL_LIMIT_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def cmd_generate(args):
    config = ds.GenerationConfig(
        hbar_values=tuple(float(h) for h in _float_list(args.hbars, "hbars")),
        num_ic_per_hbar=args.num_ic,
        ic_low=args.ic_low,
        ic_high=args.ic_high,
        t_max=args.t_max,
        t_steps=args.t_steps,
        m=args.m,
        omega=args.omega,
        seed=args.seed,
    )
    data = ds.generate(config, threads=args.threads)
    ds.write_dataset(data, args.out)
    log.info("wrote %d samples to %s", len(data), args.out)
    return 0


def _train_config(args):
    return tr.TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        seed=args.seed,
        val_fraction=args.val_frac,
        hidden_layer_sizes=tuple(_int_list(args.hidden, "hidden")),
    )


def cmd_train(args):
    config = _train_config(args)
    data = ds.read_dataset(args.data)
    mlp, report = tr.train(data, config)
    nn.save_checkpoint(mlp, tr.checkpoint_metadata(config, data), args.out)
    report_path = args.report or str(Path(args.out).with_name(Path(args.out).stem + ".report.json"))
    tr.write_report(report, report_path)
    if report.train_loss:
        log.info(
            "trained %d epochs in %.1fs: train loss %.3g -> %.3g, final val loss %s",
            config.epochs, report.wall_time, report.train_loss[0], report.train_loss[-1],
            report.val_loss[-1],
        )
    log.info("wrote checkpoint %s and report %s", args.out, report_path)
    return 0


def _oscillator(metadata):
    conf = metadata.get("dataset_config") or {}
    return OscillatorParams(conf.get("m", 1.0), conf.get("omega", 1.0))


def cmd_sweep(args):
    window = None
    if args.t_window is not None:
        window = [float(v) for v in _float_list(args.t_window, "t-window")]
        if len(window) != 2:
            raise UsageError(f"--t-window: expected t_lo,t_hi, got {args.t_window!r}")
    mlp, meta = nn.load_checkpoint(args.checkpoint)
    table = ev.hbar_sweep(mlp, args.x0, args.p0, _float_list(args.hbars, "hbars"), _oscillator(meta))
    if window is not None:
        table = ev.window(table, *window)
    ev.emit_csv(table, args.out)
    for label, row in table.summary().items():
        log.info("hbar=%s rmse=%.3g max_abs=%.3g", label, row["rmse"], row["max_abs"])
    log.info("wrote %d rows to %s", len(table.grid), args.out)
    return 0


def cmd_evaluate(args):
    mlp, meta = nn.load_checkpoint(args.checkpoint)
    data = ds.read_dataset(args.data)
    if args.subset == "all":
        subset = data
    else:
        config = tr.TrainConfig(
            seed=meta.get("seed", 0), val_fraction=meta.get("val_fraction", 0.1)
        )
        train_set, val_set = tr.split_for_training(data, config)
        subset = val_set if args.subset == "val" else train_set
    if len(subset) == 0:
        raise ValidationError(f"the '{args.subset}' subset is empty")
    pred = nn.predict(mlp, subset.features)
    classical = closed_form_many(subset.features[:, 0], subset.features[:, 1], data.grid, _oscillator(meta))
    out = sys.stdout
    out.write(f"subset,{args.subset}\n")
    out.write(f"n_samples,{len(subset)}\n")
    out.write(f"mse,{tr.evaluate_loss(mlp, subset)!r}\n")
    out.write("hbar,n,rmse_vs_classical,max_abs_vs_classical\n")
    _, first = np.unique(subset.hbar, return_index=True)
    for h in subset.hbar[np.sort(first)]:
        rows = subset.hbar == h
        out.write(
            f"{float(h)!r},{int(rows.sum())},{ev.rmse(pred[rows], classical[rows])!r},"
            f"{ev.max_abs(pred[rows], classical[rows])!r}\n"
        )
    return 0


def cmd_predict(args):
    mlp, _ = nn.load_checkpoint(args.checkpoint)
    traj = ev.predict_trajectory(mlp, args.x0, args.p0, args.hbar)
    sys.stdout.write("t,x\n")
    for t, x in zip(traj.t.tolist(), traj.x_values.tolist()):
        sys.stdout.write(f"{t!r},{x!r}\n")
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "sweep": cmd_sweep,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
}


def main(argv=None):
    _setup_logging()
    try:
        args = parse_args(argv)
        log.info("resolved config: %s", json.dumps(vars(args), sort_keys=True))
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except (UsageError, ValidationError) as exc:
        log.error("%s", exc)
        return 2
    except OSError as exc:
        log.error("%s", exc)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.exception("unexpected failure: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
