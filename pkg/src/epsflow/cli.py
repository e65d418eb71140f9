"""Command-line entry point ``epsflow``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .runner import EXIT_CONFIG, EXIT_IO, EXIT_OK, execute, sweep
from .suites import SUITE_NAMES, failures, run_suite, write_report

EXIT_VERIFY = 5

log = logging.getLogger("epsflow")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _eps_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, help="worker threads (overrides the config)")
    common.add_argument("--output", help="output directory (overrides the config)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="epsflow", description="Axisymmetric eps-model flow solver.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", parents=[common], help="evolve one configuration")
    r.add_argument("config")
    r.add_argument("--resume", metavar="SNAPSHOT", help="continue from a snapshot file")

    s = sub.add_parser("sweep", parents=[common], help="run one configuration per epsilon")
    s.add_argument("config")
    s.add_argument("--eps", type=_eps_list, required=True, help="comma-separated epsilon values")

    v = sub.add_parser("verify", parents=[common], help="run a property/convergence suite")
    v.add_argument("suite", choices=SUITE_NAMES + ("all",))
    v.add_argument("--eps", type=float, help="restrict energy/maxprinciple to one epsilon")
    v.add_argument("--nu", type=float, help="restrict maxprinciple to one viscosity")
    v.add_argument("--quick", action="store_true", help="skip the refined-grid convergence runs")
    return p


def _load(args):
    cfg = load_config(args.config)
    over = {}
    if args.threads is not None:
        over["threads"] = args.threads
    if args.output is not None:
        over["output"] = args.output
    return cfg.with_values(**over) if over else cfg


def _verify(args) -> int:
    checks = run_suite(args.suite, refine=not args.quick, eps=args.eps, nu=args.nu)
    if args.output:
        out = Path(args.output)
        try:
            out.mkdir(parents=True, exist_ok=True)
            with open(out / f"verify_{args.suite}.csv", "w", newline="") as fh:
                write_report(checks, fh)
        except OSError as exc:
            log.error("%s", exc)
            return EXIT_IO
    else:
        write_report(checks, sys.stdout)
    bad = failures(checks)
    for c in bad:
        log.error("violated: %s / %s (lhs=%r, rhs=%r)", c.suite, c.case, c.lhs, c.rhs)
    return EXIT_VERIFY if bad else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="epsflow: %(message)s", stream=sys.stderr)
    try:
        if args.command == "verify":
            return _verify(args)
        cfg = _load(args)
        if args.command == "run":
            res = execute(cfg, args.resume)
            if res.message:
                log.error("%s", res.message)
            elif res.records:
                log.info("reached t=%g, output in %s", res.final_state.t, cfg.output)
            return res.status
        rows = sweep(cfg, args.eps)
        for row in rows:
            log.info("eps=%g %s omega1 growth %.4g", row["epsilon"], row["status"], row["omega1_growth"])
        return EXIT_OK
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
