"""``towerlab`` command line."""

from __future__ import annotations

import argparse
import sys

from .lab import ANALYSES, EXIT_INPUT, ConfigError, RunConfig, run


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _common(p: argparse.ArgumentParser):
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="seed for the randomized rank checks")
    p.add_argument("--strict", action="store_true", help="reject unknown fields in input files")
    p.add_argument("--lax", action="store_true", help="only warn about unknown fields in input files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="towerlab", description="Betti number growth along towers of covers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a JSON config file")
    p.add_argument("--config", required=True)
    _common(p)

    for name in ANALYSES:
        p = sub.add_parser(name, help=f"run the {name} analysis")
        p.add_argument("--complex", required=True, help='builtin ("wedge:2", "torus:2", "circle", "lls:2,2") or file')
        p.add_argument(
            "--tower", default="abelian", help="abelian, abelian-refined, heisenberg, cyclic or a tower file"
        )
        p.add_argument("--degree", type=_ints, help="degrees, comma separated (default: all)")
        p.add_argument("--p", type=_ints, help="primes, comma separated; the first one builds the tower (default 2)")
        p.add_argument("--kmax", type=int, default=4, help="highest moment")
        p.add_argument("--depth", type=int, default=3, help="tower depth")
        p.add_argument("--moduli", type=_ints, default=[], help="level moduli of the cyclic tower")
        p.add_argument("--dimension", type=int, help="tower dimension d for the padic fit")
        _common(p)
    return parser


def config_from_args(args) -> RunConfig:
    strict = not args.lax
    if args.command == "run":
        cfg = RunConfig.from_file(args.config, strict)
        if args.strict:
            cfg.strict = True
        if args.lax:
            cfg.strict = False
    else:
        primes = args.p or ([2, 3, 5] if args.command == "rankgrad" else [2])
        cfg = RunConfig(
            complex=args.complex,
            tower=args.tower,
            p=primes[0],
            depth=args.depth,
            moduli=args.moduli,
            degrees=args.degree,
            primes=primes if args.command in ("betti", "modp", "padic", "rankgrad") else [],
            analyses=[args.command],
            k_max=args.kmax,
            tower_dimension=args.dimension,
            strict=strict,
        )
    if args.out:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
