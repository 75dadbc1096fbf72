import argparse
import logging
import sys

from .errors import ManakovError
from .harness import EXIT_INVALID, RunConfig, run


def build_parser():
    ap = argparse.ArgumentParser(prog="manakov-asym",
                                 description="Scattering, long-time asymptotics and PDE checks "
                                             "for the three-component Manakov system.")
    sub = ap.add_subparsers(dest="verb", required=True)
    for verb, text in [("scatter", "tabulate a, b and gamma on the lambda grid"),
                       ("asym", "evaluate the leading-order field at one time"),
                       ("evolve", "run the split-step solver to every snapshot time"),
                       ("compare", "cone errors of the asymptotics against the snapshots")]:
        p = sub.add_parser(verb, help=text)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--phase-convention", choices=["theorem", "eta2", "auto"])
        p.add_argument("-v", "--verbose", action="store_true")
        if verb == "asym":
            p.add_argument("--scattering", help="scattering JSON (default: OUT/scattering.json)")
            p.add_argument("--t", type=float)
            p.add_argument("--x-min", type=float)
            p.add_argument("--x-max", type=float)
            p.add_argument("--nx", type=int)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = RunConfig.load(args.config, args.out, args.phase_convention)
    except (ManakovError, ValueError) as exc:
        logging.getLogger("manakov_asym").error("config: %s", exc)
        return EXIT_INVALID
    kw = {}
    if args.verb == "asym":
        kw = dict(scattering_file=args.scattering, t=args.t, x_min=args.x_min,
                  x_max=args.x_max, n_x=args.nx)
    return run(args.verb, cfg, **kw)


if __name__ == "__main__":
    sys.exit(main())
