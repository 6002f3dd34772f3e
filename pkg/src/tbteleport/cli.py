"""Command-line entry point.

    tbteleport run paper_12p3km --experiment drift_study --feedback off --out runs/d1
    tbteleport validate my_scenario.yaml
"""

import argparse
import logging
import sys
from pathlib import Path

from .detection import write_tags_bin
from .experiments import KINDS, run_named
from .feedback import FeedbackState, write_feedback_log
from .protocol.config import diagnose, load_scenario
from .rng import fresh_seed
from .validation import ConfigError

log = logging.getLogger("tbteleport")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="tbteleport", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write its artifacts")
    run.add_argument("scenario", help="preset name or path to a YAML scenario")
    run.add_argument("--experiment", choices=KINDS,
                     help="experiment kind (default: experiment.kind from the scenario)")
    run.add_argument("--duration-h", type=float,
                     help="simulated hours per setting (default: experiment.duration_h)")
    run.add_argument("--seed", type=int, help="64-bit seed; drawn from OS entropy if omitted")
    run.add_argument("--feedback", choices=("on", "off"),
                     help="override feedback.enabled")
    run.add_argument("--out", default="out", help="output directory (default: ./out)")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="override a config entry, e.g. user.mu=0.1")
    run.add_argument("--no-tags", action="store_true", help="skip writing tags.bin")
    run.add_argument("--name", help="report name (default: scenario name)")

    val = sub.add_parser("validate", help="check a scenario without simulating")
    val.add_argument("scenario")
    val.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    return p


def _combined_feedback(runs):
    """Concatenate per-setting controller logs on one time axis."""
    state, offset = FeedbackState(), 0.0
    for r in runs:
        if r.feedback is None:
            continue
        for epoch, measured, cmd, sat in r.feedback.history:
            state.record(epoch + offset, measured, cmd, sat)
        offset += r.duration_s
    return state


def _summary_lines(report):
    res = report.results
    lines = [f"{report.name}: {report.experiment}, {report.duration_h:g} h per setting, "
             f"seed {report.seed}"]
    if "fits" in res:
        for o, f in res["fits"].items():
            lines.append(f"  {o:9s} visibility {f['visibility']:.3f}  "
                         f"max {f['offset'] + f['amplitude']:.1f}")
    if "average_visibility" in res:
        lines.append(f"  average visibility {res['average_visibility']:.3f}")
    if "fringe_max_rate" in res:
        r = res["fringe_max_rate"]
        lines.append(f"  event rate {r['per_hour']:.1f} +- {r['stderr']:.1f} per hour")
    if "states" in res:
        lines.append("  state   PsiPlus  PsiMinus")
        for label, per in res["states"].items():
            cells = [f"{per[o]['fidelity']:.3f}" if o in per else "  -  "
                     for o in ("PsiPlus", "PsiMinus")]
            lines.append(f"  {label:6s}  {cells[0]:7s}  {cells[1]}")
        avg = res["average_fidelity"]
        lines.append("  average " + "  ".join(
            f"{avg[o]:.3f}" if avg[o] is not None else "-" for o in ("PsiPlus", "PsiMinus")))
    if "normalized" in res:
        lines.append(f"  HOM visibility {res['visibility']:.3f} (fit {res['fit_visibility']:.3f})")
    if "true_delta_std_ps" in res:
        lines.append(f"  feedback {'on' if res['feedback'] else 'off'}: "
                     f"delay spread {res['true_delta_std_ps']:.2f} ps, "
                     f"swing {res['true_delta_swing_ps']:.1f} ps over "
                     f"{res['temperature_swing_c']:.2f} C")
        if "delay_per_2c_ps" in res:
            lines.append(f"  delay change per 2 C: {res['delay_per_2c_ps']:.1f} ps")
    return lines


def cmd_run(args):
    try:
        cfg = load_scenario(args.scenario, args.overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: output directory {out} is not writable: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG

    seed = args.seed if args.seed is not None else cfg.simulation.seed
    if seed is None:
        seed = fresh_seed()
        log.info("no seed given; using %d", seed)
    kind = args.experiment or cfg.experiment.kind
    feedback_on = None if args.feedback is None else args.feedback == "on"
    try:
        report, tags, runs = run_named(kind, cfg, seed, args.duration_h, feedback_on, args.name)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    report.write(out)
    if not args.no_tags and len(tags):
        write_tags_bin(tags, out / "tags.bin")
    fb = _combined_feedback(runs)
    if fb.history:
        write_feedback_log(fb, out / "feedback.csv")
    print("\n".join(_summary_lines(report)))
    print(f"  wrote {out}/")
    return EXIT_OK


def cmd_validate(args):
    problems = diagnose(args.scenario, args.overrides)
    if not problems:
        print(f"{args.scenario}: ok")
        return EXIT_OK
    for p in problems:
        print(p)
    return EXIT_CONFIG


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = _parser().parse_args(argv)
    return {"run": cmd_run, "validate": cmd_validate}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
