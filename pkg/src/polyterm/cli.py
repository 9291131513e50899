"""Command line entry point: program file in, verdict out.

Exit status: 0 YES, 1 MAYBE, 2 TIMEOUT, 3 input error. Given a directory,
every `*.pl` file in it is analyzed and one line per file is printed
(ordered by filename); the exit status is then 0 only if every file got YES.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .driver import MAYBE, TIMED_OUT, YES, ProverConfig, prove, report
from .parser import ParseError, parse_program, parse_query_spec, parse_query_string

_EXIT = {YES: 0, MAYBE: 1, TIMED_OUT: 2}


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="polyterm",
        description="Termination prover for definite logic programs "
        "based on polynomial interpretations.",
    )
    ap.add_argument("path", help="program file, or a directory for batch mode")
    ap.add_argument(
        "--query",
        help="query pattern such as 'd(g,a)'; overrides %%%% query annotations",
    )
    ap.add_argument("--coeff-max", type=int, default=2,
                    help="domain upper bound for unknown coefficients (default 2)")
    ap.add_argument("--timeout", type=float, default=60.0,
                    help="global time limit in seconds (default 60)")
    ap.add_argument("--verify-bound", type=int, default=5,
                    help="valuation bound for witness verification (default 5)")
    ap.add_argument("--shape", choices=["auto", "linear", "simple-mixed"],
                    default="auto", help="interpretation shape strategy")
    ap.add_argument("--format", choices=["text", "structured"], default="text",
                    help="report format for single-file mode")
    return ap


def _config(args) -> ProverConfig:
    if args.coeff_max < 1:
        raise ValueError("--coeff-max must be >= 1")
    if args.timeout <= 0:
        raise ValueError("--timeout must be > 0")
    return ProverConfig(
        coeff_max=args.coeff_max,
        timeout=args.timeout,
        verify_bound=args.verify_bound,
        shape=args.shape,
    )


def _analyze(path: Path, args, config: ProverConfig):
    program = parse_program(path.read_text(encoding="utf-8"))
    if args.query:
        queries = parse_query_string(args.query, program)
    else:
        queries = parse_query_spec(program.annotations, program)
    if not queries.patterns:
        raise ValueError(
            f"{path}: no %% query annotation found and no --query given"
        )
    return program, prove(program, queries, config)


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        config = _config(args)
        path = Path(args.path)
        if not path.exists():
            print(f"error: no such file or directory: {path}", file=sys.stderr)
            return 3
        if path.is_dir():
            status = 0
            for f in sorted(path.glob("*.pl")):
                try:
                    _, verdict = _analyze(f, args, config)
                    print(f"{f.name}: {verdict.status}")
                    if verdict.status != YES:
                        status = 1
                except (ParseError, ValueError) as e:
                    print(f"{f.name}: ERROR {e}")
                    status = 1
                sys.stdout.flush()
            return status
        program, verdict = _analyze(path, args, config)
        sys.stdout.write(report(verdict, program, args.format))
        return _EXIT[verdict.status]
    except (ParseError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
