"""Command-line front end.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime/numerical
error, 3 acceptance threshold missed under ``--check``.
"""
import argparse
import os
import sys
from pathlib import Path

from . import experiment as ex
from .config import load_config, preset_names
from .exceptions import AsinError, ConfigurationError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_CHECK = 0, 1, 2, 3

PLOTS_MD = """\
# Expected figures

All CSVs have a header row; floats are written in shortest round-trip form.

- `loss_curve.csv` (epoch, loss): correlator training loss per epoch. Plot loss
  against epoch on a log y-axis; the curve should be non-increasing.
- `roc.csv` (threshold, pfp, pd), detection runs: ROC curve, pd against pfp.
  The operating point from `calibration.txt` sits near pfp = target_pfp.
- `decisions.csv` (score, present, p_present), detection runs: histogram of
  scores coloured by the present flag; p_present against score is a sigmoid
  centred on the threshold.
- `estimates.csv` (truth, score, estimate), regression runs: scatter of
  estimate against truth with the identity line; its Pearson r is in
  `eval.csv`.
- `resolution_np.csv` / `resolution_cr.csv` (delta_theta, statistic, ci_low,
  ci_high): statistic against delta_theta with the CI band, a horizontal line
  at epsilon and a vertical line at the reported delta (header block).
- `scenes_*.csv`: a few rows of e_0..e_{n-1} plotted against bin index show
  the synthetic range profiles.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    parser = _Parser(prog="asinlab", description="Application-specific instrumentation simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "gen": "generate train/test scenes",
        "train": "generate scenes, design the ASIN matrix and train the correlator",
        "eval": "evaluate a trained model on the test scenes",
        "run": "full experiment: gen, train, eval and optional resolution reports",
        "resolution": "Neyman-Pearson / Cramer-Rao resolution reports",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", required=True,
                       help=f"config file, or a bundled preset: {', '.join(preset_names())}")
        p.add_argument("--out", help="output directory (default: $ASINLAB_OUT, then output.dir)")
        p.add_argument("--seed", type=_u64, help="override run.master_seed")
        p.add_argument("--check", action="store_true",
                       help="exit 3 unless the acceptance threshold (check.*) is met")
        p.add_argument("--model", help="model file (eval, resolution); sibling matrix and "
                                       "calibration files are read from its directory")
    return parser


def _output_dir(args, cfg):
    out = args.out or os.environ.get("ASINLAB_OUT") or cfg["output.dir"] or "asinlab_out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _check(cfg, summary):
    if summary.accuracy is not None:
        ok = summary.accuracy >= cfg["check.min_accuracy"]
        print(f"check: accuracy {summary.accuracy:.4f} >= {cfg['check.min_accuracy']}: "
              f"{'PASS' if ok else 'FAIL'}")
    else:
        ok = summary.pearson_r >= cfg["check.min_pearson"]
        print(f"check: pearson_r {summary.pearson_r:.4f} >= {cfg['check.min_pearson']}: "
              f"{'PASS' if ok else 'FAIL'}")
    return ok


def _summary_line(summary):
    if summary.accuracy is not None:
        auc = "n/a" if summary.auc is None else f"{summary.auc:.4f}"
        return (f"eval: n={summary.n} accuracy={summary.accuracy:.4f} auc={auc} "
                f"tp={summary.tp} fp={summary.fp} tn={summary.tn} fn={summary.fn}")
    return f"eval: n={summary.n} pearson_r={summary.pearson_r:.4f}"


def _print_reports(reports):
    for kind, rep in reports.items():
        print(f"resolution[{kind}]: delta={rep.delta:.6g} epsilon={rep.epsilon:g} "
              f"theta0={rep.theta0:g} saturated={str(rep.saturated).lower()}")


def _train(cfg, out):
    train, test = ex.generate_scenes(cfg)
    ex.write_scenes(out, train, test)
    print(f"gen: {len(train)} train / {len(test)} test {cfg['scenario.name']} scenes")
    stack = ex.train_stack(cfg, train)
    ex.save_stack(out, stack)
    print(f"train: asin={stack.asin.design_method.value} k={stack.model.k} "
          f"final_loss={stack.model.train_meta.final_loss:.6g}")
    return stack, test


def _evaluate(cfg, out, stack, test, check):
    summary, scores, truths = ex.evaluate(cfg, stack, test)
    ex.write_eval(out, summary, scores, truths, stack)
    print(_summary_line(summary))
    return check and not _check(cfg, summary)


def _model_path(args, out):
    return Path(args.model) if args.model else out / ex.MODEL_FILE


def dispatch(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.set("run.master_seed", args.seed)
    out = _output_dir(args, cfg)
    failed = False

    if args.command == "gen":
        train, test = ex.generate_scenes(cfg)
        ex.write_scenes(out, train, test)
        print(f"gen: {len(train)} train / {len(test)} test {cfg['scenario.name']} scenes")
    elif args.command == "train":
        _train(cfg, out)
    elif args.command == "eval":
        stack = ex.load_stack(cfg, _model_path(args, out))
        test_file = out / ex.SCENES_TEST
        test = ex.read_test_scenes(out) if test_file.exists() else ex.generate_scenes(cfg)[1]
        failed = _evaluate(cfg, out, stack, test, args.check)
    elif args.command == "run":
        stack, test = _train(cfg, out)
        failed = _evaluate(cfg, out, stack, test, args.check)
        if cfg["resolution.enabled"]:
            reports = ex.resolution_reports(cfg, stack)
            ex.write_resolution(out, reports)
            _print_reports(reports)
        (out / "PLOTS.md").write_text(PLOTS_MD)
    elif args.command == "resolution":
        stack = None
        if cfg["resolution.channel"] == "pipeline":
            stack = ex.load_stack(cfg, _model_path(args, out))
        reports = ex.resolution_reports(cfg, stack)
        ex.write_resolution(out, reports)
        _print_reports(reports)

    ex.write_manifest(out, cfg)
    print(f"manifest: {out / ex.MANIFEST}")
    return EXIT_CHECK if failed else EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return dispatch(args)
    except ConfigurationError as exc:
        print(f"asinlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"asinlab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AsinError, ArithmeticError, ValueError) as exc:
        print(f"asinlab: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
