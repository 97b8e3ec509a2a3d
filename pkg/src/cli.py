#!/usr/bin/env python3
# Copyright 2022 Canonical Ltd.
# See LICENSE file for licensing details.

"""Command line front end for the commutative-depth synthesizers.

    cli.py synth prefix --n 14 -o prefix.txt
    cli.py synth linear --matrix m.txt --seed 3 -o linear.txt
    cli.py synth clifford --tableau t.txt -o clifford.txt
    cli.py verify linear.txt --matrix m.txt
    cli.py analyze prefix.txt --compact
    cli.py bounds --n 20 --d 4 --s 60
    cli.py search-depth --n 3

Exit codes: 0 success, 2 unparsable input, 3 violated precondition, 4 failed
verification. Reports go to stdout as key=value lines, diagnostics to stderr.
"""

import argparse
import logging
import math
import sys
from collections import namedtuple
from pathlib import Path
from typing import List, Optional, Sequence

from ccdepth.v0.bounds import bounds_report, min_depth_search
from ccdepth.v0.circuit import (
    FORMAT_HEADER,
    CircuitParseError,
    CliffordTableau,
    LayeredCircuit,
    TableauParseError,
    compact_layers,
    depth,
    parse_circuit,
    parse_tableau,
    serialize_circuit,
    size,
    standard_depth,
    to_tableau,
    validate_layer,
)
from ccdepth.v0.cliffsynth import pad_tableau, synth_clifford
from ccdepth.v0.gf2 import MatrixParseError, direct_sum, identity, parse_matrix
from ccdepth.v0.linsynth import synth_linear
from ccdepth.v0.prefixsynth import prefix_matrix, synth_prefix
from config import LOG_LEVELS, ConfigError, SynthesisConfig, load_config

logger = logging.getLogger(__name__)

VERSION = "1.0.0"

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_VERIFICATION = 4

PREFIX = "prefix"
LINEAR = "linear"
CLIFFORD = "clifford"

SynthReport = namedtuple(
    "SynthReport",
    "width commutative_depth two_qubit_size total_size verified target_kind seed",
)
SynthReport.__doc__ = """
Summary of one synthesis run.

`verified` is only true after the circuit was simulated and compared exactly with its
target matrix or tableau.
"""


class VerificationError(Exception):
    """A circuit breaks a layer rule or does not compute its target."""


def _read(path: Path) -> str:
    return path.read_text()


def _report_lines(record) -> List[str]:
    lines = []
    for key, value in record._asdict().items():
        if isinstance(value, bool):
            value = str(value).lower()
        lines.append(f"{key}={'-' if value is None else value}")
    return lines


def _provenance(argv: Sequence[str], seed: Optional[int]) -> List[str]:
    """Header comments naming the tool, the command and the seed.

    The output path is left out so identical runs write identical files.
    """
    command, skip = [], False
    for token in argv:
        if skip:
            skip = False
        elif token in ("-o", "--output"):
            skip = True
        elif not token.startswith(("-o=", "--output=")):
            command.append(token)
    return [
        f"# tool: ccdepth {VERSION}",
        f"# command: {' '.join(command)}",
        f"# seed: {'-' if seed is None else seed}",
    ]


def _write_circuit(path: Path, circuit: LayeredCircuit, header: List[str]) -> None:
    body = serialize_circuit(circuit).splitlines()
    if body[0] == FORMAT_HEADER:
        body = body[1:]
    path.write_text("\n".join([FORMAT_HEADER] + header + body) + "\n")


def check_against(circuit: LayeredCircuit, target: CliffordTableau) -> None:
    """Check every layer rule, then exact semantics against a tableau.

    Raises:
        VerificationError: with distinct messages for layer violations and mismatches.
    """
    for number, layer in enumerate(circuit.layers):
        if not validate_layer(layer):
            raise VerificationError(f"layer {number} holds gates that do not commute")
    if circuit.width != target.width:
        raise VerificationError(
            f"circuit has {circuit.width} qubits but the target has {target.width}"
        )
    if to_tableau(circuit) != target:
        raise VerificationError("circuit does not compute its target")


def _synthesize(args, config: SynthesisConfig):
    seed = config.seed if args.seed is None else args.seed
    budget = config.commutator_budget
    if args.kind == PREFIX:
        circuit = synth_prefix(args.n)
        return circuit, CliffordTableau.from_linear(prefix_matrix(args.n)), None
    if args.kind == LINEAR:
        matrix = parse_matrix(_read(args.matrix))
        if args.pad and matrix.rows % 2:
            logger.warning("padding a width %d matrix with an idle qubit", matrix.rows)
            matrix = direct_sum(matrix, identity(1))
        circuit = synth_linear(matrix, seed, budget)
        return circuit, CliffordTableau.from_linear(matrix), seed
    tableau = parse_tableau(_read(args.tableau))
    if args.pad and tableau.width % 2:
        tableau = pad_tableau(tableau)
    return synth_clifford(tableau, seed, budget), tableau, seed


def cmd_synth(args, config: SynthesisConfig, argv: Sequence[str]) -> int:
    """Synthesize, verify and write one circuit."""
    circuit, target, seed = _synthesize(args, config)
    check_against(circuit, target)
    two_qubit, total = size(circuit)
    report = SynthReport(
        width=circuit.width,
        commutative_depth=depth(circuit),
        two_qubit_size=two_qubit,
        total_size=total,
        verified=True,
        target_kind=args.kind,
        seed=seed,
    )
    _write_circuit(args.output, circuit, _provenance(argv, seed))
    logger.info("wrote %s", args.output)
    print("\n".join(_report_lines(report)))
    return EXIT_OK


def cmd_verify(args, config: SynthesisConfig) -> int:
    """Check a circuit file against a matrix, a tableau or Prefix Sum."""
    circuit = parse_circuit(_read(args.circuit))
    if args.matrix is not None:
        target = CliffordTableau.from_linear(parse_matrix(_read(args.matrix)))
    elif args.tableau is not None:
        target = parse_tableau(_read(args.tableau))
    else:
        target = CliffordTableau.from_linear(prefix_matrix(circuit.width))
    check_against(circuit, target)
    two_qubit, total = size(circuit)
    print("verified=true")
    print(f"commutative_depth={depth(circuit)}")
    print(f"two_qubit_size={two_qubit}")
    print(f"total_size={total}")
    return EXIT_OK


def cmd_analyze(args, config: SynthesisConfig) -> int:
    """Depth and size metrics of a circuit file."""
    circuit = parse_circuit(_read(args.circuit))
    two_qubit, total = size(circuit)
    lines = [
        f"width={circuit.width}",
        f"commutative_depth={depth(circuit)}",
        f"standard_depth={standard_depth(circuit)}",
        f"two_qubit_size={two_qubit}",
        f"total_size={total}",
    ]
    if circuit.width > 1:
        ratio = two_qubit / (circuit.width * math.log2(circuit.width))
        lines.append(f"size_ratio={ratio:.4f}")
    if config.verify:
        valid = all(validate_layer(layer) for layer in circuit.layers)
        lines.append(f"layers_valid={str(valid).lower()}")
    if args.compact:
        lines.append(f"compact_depth={depth(compact_layers(circuit))}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_bounds(args, config: SynthesisConfig) -> int:
    """Counting bounds at (n, d, s)."""
    report = bounds_report(args.n, args.d, args.s)
    lines = _report_lines(report)
    if args.format == "text":
        pairs = [line.split("=", 1) for line in lines]
        width = max(len(key) for key, _ in pairs)
        lines = [f"{key.ljust(width)}  {value}" for key, value in pairs]
    print("\n".join(lines))
    return EXIT_OK


def cmd_search_depth(args, config: SynthesisConfig) -> int:
    """Histogram of minimum commutative depths over GL(n, 2)."""
    search = min_depth_search(args.n)
    for value, count in search.histogram.items():
        print(f"depth={value} count={count}")
    print(f"total={len(search)}")
    return EXIT_OK


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one sub-parser per command."""
    parser = argparse.ArgumentParser(
        prog="ccdepth", description="Constant commutative-depth circuit synthesis"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument("--config", type=Path, help="YAML file overriding option defaults")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="synthesize a circuit")
    kinds = synth.add_subparsers(dest="kind", required=True)
    prefix = kinds.add_parser(PREFIX, help="Prefix Sum on n qubits")
    prefix.add_argument("--n", type=_positive, required=True)
    linear = kinds.add_parser(LINEAR, help="CNOT circuit for an invertible matrix")
    linear.add_argument("--matrix", type=Path, required=True)
    clifford = kinds.add_parser(CLIFFORD, help="Clifford circuit for a tableau")
    clifford.add_argument("--tableau", type=Path, required=True)
    for sub in (prefix, linear, clifford):
        sub.add_argument("-o", "--output", type=Path, required=True)
        sub.add_argument("--seed", type=int)
    for sub in (linear, clifford):
        sub.add_argument("--pad", action="store_true", help="add an idle qubit to odd widths")

    verify = commands.add_parser("verify", help="check a circuit against its target")
    verify.add_argument("circuit", type=Path)
    targets = verify.add_mutually_exclusive_group(required=True)
    targets.add_argument("--matrix", type=Path)
    targets.add_argument("--tableau", type=Path)
    targets.add_argument("--prefix", action="store_true", help="Prefix Sum of the width")

    analyze = commands.add_parser("analyze", help="depth and size of a circuit")
    analyze.add_argument("circuit", type=Path)
    analyze.add_argument("--compact", action="store_true", help="also report greedy re-layering")

    bounds = commands.add_parser("bounds", help="counting lower bounds")
    bounds.add_argument("--n", type=_positive, required=True)
    bounds.add_argument("--d", type=int, default=3)
    bounds.add_argument("--s", type=int)
    bounds.add_argument("--format", choices=("text", "kv"), default="kv")

    search = commands.add_parser("search-depth", help="exact minimum depths for n <= 4")
    search.add_argument("--n", type=_positive, required=True)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    level = (args.log_level or config.log_level).upper()
    if level not in LOG_LEVELS:
        print(f"error: unknown log level {level}", file=sys.stderr)
        return EXIT_PRECONDITION
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    handlers = {
        "verify": cmd_verify,
        "analyze": cmd_analyze,
        "bounds": cmd_bounds,
        "search-depth": cmd_search_depth,
    }
    try:
        if args.command == "synth":
            return cmd_synth(args, config, argv)
        return handlers[args.command](args, config)
    except (MatrixParseError, CircuitParseError, TableauParseError, UnicodeDecodeError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as e:
        print(f"cannot read input: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (VerificationError, AssertionError) as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFICATION
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
