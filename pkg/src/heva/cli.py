"""Command-line front end.

Commands operate on kernel and vector files (or ``builtin`` chain specs) and
print either a human-readable report or a diffable tsv.  Exit statuses:
0 success, 2 validation failure, 3 truncation tail exceeded, 4 parse error.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Sequence

from .algebra import product, square_basis
from .elements import Element, TruncationPolicy, read_element
from .errors import (
    ElementFormatError,
    HevaError,
    InvalidParameter,
    InvalidWeights,
    KernelFormatError,
    MissingCertificate,
    NonFiniteCoefficient,
    NotMarkov,
    TailTooLarge,
    UnsupportedInput,
)
from .markov import (
    Distribution,
    TransitionKernel,
    builtin_kernel,
    evolve_distribution,
    load_kernel,
    nstep_oracle,
    read_distribution,
    simulate,
    to_structure_map,
    validate_kernel,
)
from .operator import certify_hilbert_schmidt, certify_rowsum, certify_schur

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_TAIL = 3
EXIT_PARSE = 4

COMMANDS = (
    "validate",
    "certify",
    "evolve",
    "nstep",
    "simulate",
    "compare",
    "product",
    "square",
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heva",
        description=(
            "Evolution algebras over a countable orthonormal basis, bridged "
            "to countable-state Markov chains."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument(
            "--kernel",
            nargs="+",
            required=True,
            metavar="PATH|builtin ...",
            help="kernel file, or e.g. 'builtin renewal geometric 0.5'",
        )
        p.add_argument("--cutoff", type=int, default=256)
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--max-tail", type=float, default=1e-3, dest="max_tail")
        p.add_argument("--method", choices=("schur", "hs", "rowsum"))
        p.add_argument("--alpha", help="row weight file (coefficient format)")
        p.add_argument("--beta", help="column weight file (coefficient format)")
        p.add_argument(
            "--init",
            action="append",
            metavar="PATH|basis:i",
            help="initial vector; 'product' takes it twice",
        )
        p.add_argument("--steps", type=int, default=1)
        p.add_argument("--paths", type=int, default=10000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", choices=("human", "tsv"), default="human")
    return parser


def _resolve_kernel(tokens: list[str]) -> TransitionKernel:
    if tokens[0] == "builtin":
        if len(tokens) < 2:
            raise KernelFormatError("builtin kernel spec is empty")
        return builtin_kernel(tokens[1:])
    if len(tokens) != 1:
        raise KernelFormatError(f"unexpected kernel spec {tokens!r}")
    return load_kernel(tokens[0])


def _resolve_element(spec: str) -> Element:
    if spec.startswith("basis:"):
        try:
            return Element.basis(int(spec.split(":", 1)[1]))
        except ValueError as exc:
            raise ElementFormatError(f"bad basis spec {spec!r}") from exc
    return read_element(spec)


def _resolve_distribution(spec: str, abs_tol: float) -> Distribution:
    if spec.startswith("basis:"):
        try:
            return Distribution.point_mass(int(spec.split(":", 1)[1]))
        except ValueError as exc:
            raise ElementFormatError(f"bad basis spec {spec!r}") from exc
    return read_distribution(spec, abs_tol)


def _require_init(args, count: int = 1) -> list[str]:
    inits = args.init or []
    if len(inits) != count:
        raise UnsupportedInput(
            f"command {args.command!r} needs --init given {count} time(s)"
        )
    return inits


def _print_element(v: Element, out: str) -> None:
    if out == "tsv":
        for i, val in v.items():
            print(f"{i}\t{val!r}")
        print(f"#tail {v.tail_bound!r}")
    else:
        for i, val in v.items():
            print(f"  e_{i}: {val:.12g}")
        print(f"  tail bound: {v.tail_bound:.6g}")


def _print_distribution(d: Distribution, out: str) -> None:
    if out == "tsv":
        for i, p in d.underlying.items():
            print(f"{i}\t{p!r}")
        print(f"#deficit {d.mass_deficit!r}")
    else:
        for i, p in d.underlying.items():
            print(f"  state {i}: {p:.12g}")
        print(f"  deficit: {d.mass_deficit:.6g}")


def _cmd_validate(args, kernel, policy) -> int:
    report = validate_kernel(kernel, min(policy.cutoff, 64), policy)
    if report.ok:
        print(f"OK {report.states_checked} states checked")
        return EXIT_OK
    for line in report.violations:
        print(f"VIOLATION {line}")
    return EXIT_VALIDATION


def _weight_oracle(path: str | None):
    if path is None:
        return None
    weights = read_element(path).coefficients

    def oracle(i: int) -> float:
        return weights.get(i, 0.0)

    return oracle


def _cmd_certify(args, kernel, policy) -> int:
    if args.method is None:
        raise UnsupportedInput("certify needs --method schur|hs|rowsum")
    smap = to_structure_map(kernel, abs_tol=policy.abs_tol)
    if args.method == "hs":
        cert = certify_hilbert_schmidt(smap, policy)
    elif args.method == "rowsum":
        cert = certify_rowsum(smap, policy)
    else:
        cert = certify_schur(
            smap, _weight_oracle(args.alpha), _weight_oracle(args.beta), policy
        )
    print(cert.render())
    return EXIT_OK


def _cmd_evolve(args, kernel, policy) -> int:
    init = _resolve_distribution(_require_init(args)[0], policy.abs_tol)
    result = evolve_distribution(kernel, init, args.steps, policy)
    _print_distribution(result, args.output)
    return EXIT_OK


def _cmd_nstep(args, kernel, policy) -> int:
    spec = _require_init(args)[0]
    if not spec.startswith("basis:"):
        raise UnsupportedInput("nstep needs --init basis:<state>")
    from_state = int(spec.split(":", 1)[1])
    table = nstep_oracle(kernel, from_state, args.steps, policy)
    if args.output == "tsv":
        for k in sorted(table.probabilities):
            print(f"{k}\t{table.probabilities[k]!r}")
        print(f"#deficit {table.deficit!r}")
    else:
        for k in sorted(table.probabilities):
            print(f"  state {k}: {table.probabilities[k]:.12g}")
        print(f"  deficit: {table.deficit:.6g}")
    return EXIT_OK


def _cmd_simulate(args, kernel, policy) -> int:
    init = _resolve_distribution(_require_init(args)[0], policy.abs_tol)
    result = simulate(kernel, init, args.steps, args.paths, args.seed, policy)
    if args.output == "tsv":
        for s in sorted(result.counts):
            print(f"{s}\t{result.counts[s] / result.paths!r}")
        print(f"#deficit {result.escaped / result.paths!r}")
    else:
        for s in sorted(result.counts):
            print(f"  state {s}: {result.counts[s]} / {result.paths}")
        print(f"  escaped: {result.escaped}")
    return EXIT_OK


def _cmd_compare(args, kernel, policy) -> int:
    init = _resolve_distribution(_require_init(args)[0], policy.abs_tol)
    evolved = evolve_distribution(kernel, init, args.steps, policy)
    sampled = simulate(kernel, init, args.steps, args.paths, args.seed, policy)
    freqs = sampled.frequencies
    states = sorted(set(evolved.underlying.coefficients) | set(freqs))
    if args.output == "tsv":
        print("state\tevolved\tsimulated\tdelta\tbinomial_tol")
    else:
        print(f"{'state':>6} {'evolved':>14} {'simulated':>14} "
              f"{'delta':>12} {'tol(4sigma)':>12}")
    worst = 0.0
    for s in states:
        q = evolved.underlying[s]
        f = freqs.get(s, 0.0)
        delta = f - q
        tol = 4.0 * math.sqrt(max(q * (1.0 - q), 0.0) / sampled.paths)
        worst = max(worst, abs(delta) - tol)
        if args.output == "tsv":
            print(f"{s}\t{q!r}\t{f!r}\t{delta!r}\t{tol!r}")
        else:
            print(f"{s:>6} {q:>14.8g} {f:>14.8g} {delta:>12.3g} {tol:>12.3g}")
    trailer = "#" if args.output == "tsv" else ""
    print(f"{trailer}escaped {sampled.escaped}")
    print(f"{trailer}deficit {evolved.mass_deficit!r}")
    print(f"{trailer}max_excess {max(worst, 0.0)!r}")
    return EXIT_OK


def _cmd_product(args, kernel, policy) -> int:
    specs = _require_init(args, count=2)
    v = _resolve_element(specs[0])
    w = _resolve_element(specs[1])
    smap = to_structure_map(kernel, abs_tol=policy.abs_tol)
    _print_element(product(smap, v, w, policy), args.output)
    return EXIT_OK


def _cmd_square(args, kernel, policy) -> int:
    spec = _require_init(args)[0]
    if not spec.startswith("basis:"):
        raise UnsupportedInput("square needs --init basis:<i>")
    i = int(spec.split(":", 1)[1])
    smap = to_structure_map(kernel, abs_tol=policy.abs_tol)
    _print_element(square_basis(smap, i, policy), args.output)
    return EXIT_OK


_DISPATCH = {
    "validate": _cmd_validate,
    "certify": _cmd_certify,
    "evolve": _cmd_evolve,
    "nstep": _cmd_nstep,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "product": _cmd_product,
    "square": _cmd_square,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        policy = TruncationPolicy(
            cutoff=args.cutoff, abs_tol=args.tol, max_tail=args.max_tail
        )
        if args.steps < 0:
            raise UnsupportedInput("--steps must be nonnegative")
        if args.command in ("simulate", "compare") and args.paths < 1:
            raise UnsupportedInput("--paths must be >= 1")
        kernel = _resolve_kernel(args.kernel)
        return _DISPATCH[args.command](args, kernel, policy)
    except (KernelFormatError, ElementFormatError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TailTooLarge as exc:
        print(f"truncation refused: {exc}", file=sys.stderr)
        return EXIT_TAIL
    except (
        NotMarkov,
        InvalidParameter,
        InvalidWeights,
        UnsupportedInput,
        MissingCertificate,
        NonFiniteCoefficient,
        ValueError,
    ) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except HevaError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
