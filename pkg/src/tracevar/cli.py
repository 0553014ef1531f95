"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 domain error (support violation),
4 property violation found by a certificate search.
"""

from __future__ import annotations

import argparse
import hashlib
import sys

import numpy as np

from . import io
from .algebra import TracialAlgebra, validate_resolution
from .entropy import (DensityOperator, entropy_report, relative_entropy, trace_functional)
from .errors import DomainError, PropertyViolation, TracevarError
from .oracle import (oracle_entropy_commuting, oracle_gibbs_grid, oracle_partition_exhaustive)
from .sampling import random_density, random_hermitian, random_resolution
from .spectral import parse_function
from .variational import (entropy_over_subalgebras, gibbs_certificate, partition_search,
                          renyi_certificate, segal_partition_certificate)

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN, EXIT_VIOLATION = 0, 2, 3, 4


class InputError(TracevarError):
    code = "input_error"


def parse_blocks(text: str) -> TracialAlgebra:
    """``"2:1.0,3:0.5"`` -> blocks (2, 1.0), (3, 0.5). A bare ``"3"`` means weight 1."""
    blocks = []
    try:
        for item in text.split(","):
            dim, _, weight = item.strip().partition(":")
            blocks.append((int(dim), float(weight) if weight else 1.0))
    except ValueError as exc:
        raise InputError(f"cannot parse --blocks {text!r}: {exc}") from exc
    try:
        return TracialAlgebra(blocks)
    except TracevarError as exc:
        raise InputError(str(exc)) from exc


def seed_type(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return value


def _load_operator(path, symmetrize):
    return io.operator_from_dict(io.read_json(path), symmetrize=symmetrize)


def _load_density(path, symmetrize) -> DensityOperator:
    return DensityOperator(_load_operator(path, symmetrize))


def _write(args, text: str) -> None:
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _diagonal_of(path, symmetrize):
    x = _load_operator(path, symmetrize)
    if (x - x.algebra.diagonal(_diag_values(x))).norm() > 1e-12:
        raise InputError("oracle inputs must be diagonal")
    weights = [b.weight for b in x.algebra.blocks for _ in range(b.dim)]
    if len(weights) > 4:
        raise InputError("oracle inputs are limited to total dimension 4")
    return _diag_values(x).real.tolist(), weights


def _diag_values(x):
    return np.concatenate([a.diagonal() for a in x.blocks])


def cmd_entropy(args):
    D = _load_density(args.input, args.symmetrize)
    return io.dumps(entropy_report("segal", D).to_dict()) + "\n"


def cmd_renyi(args):
    D = _load_density(args.input, args.symmetrize)
    return io.dumps(entropy_report("renyi", D, alpha=args.alpha).to_dict()) + "\n"


def cmd_relative(args):
    Dw = _load_density(args.omega, args.symmetrize)
    Dp = _load_density(args.phi, args.symmetrize)
    value = relative_entropy(Dw, Dp)
    report = entropy_report("relative", Dw, value=value)
    out = report.to_dict()
    out["input_digest"] = report.input_digest + ":" + Dp.digest()
    return io.dumps(out) + "\n"


def cmd_functional(args):
    h = _load_operator(args.input, args.symmetrize)
    f = parse_function(args.f)
    value = trace_functional(f, h)
    digest = hashlib.sha256(io.operator_to_json(h).encode()).hexdigest()
    return io.dumps({"functional": "trace_functional", "value": value, "alpha": f.alpha,
                     "f": f.name, "input_digest": digest}) + "\n"


def cmd_certify(args):
    if args.kind == "gibbs":
        D = _load_density(args.input, args.symmetrize)
        cert = gibbs_certificate(D, eps=args.eps, method=args.method)
    elif args.kind == "partition":
        h = _load_operator(args.input, args.symmetrize)
        cert = partition_search(parse_function(args.f), h, args.depth, args.samples, args.seed)
    elif args.kind == "segal":
        D = _load_density(args.input, args.symmetrize)
        cert = segal_partition_certificate(D, args.depth, args.samples, args.seed)
    elif args.kind == "renyi":
        if args.alpha is None:
            raise InputError("certify renyi needs --alpha")
        D = _load_density(args.input, args.symmetrize)
        cert = renyi_certificate(D, args.alpha, args.depth, args.samples, args.seed)
    else:
        D = _load_density(args.input, args.symmetrize)
        cert = entropy_over_subalgebras(D, args.depth, args.samples, args.seed)
    if not cert.holds():
        raise PropertyViolation(f"certificate gap {cert.gap!r} breaks the {cert.direction} bound")
    return cert.to_json()


def cmd_gen(args):
    algebra = parse_blocks(args.blocks)
    if args.kind == "density":
        return io.operator_to_json(random_density(algebra, args.seed, rank=args.rank))
    if args.kind == "hermitian":
        return io.operator_to_json(random_hermitian(algebra, args.seed))
    return io.resolution_to_json(random_resolution(algebra, args.seed, cells=args.cells))


def cmd_validate(args):
    R = io.resolution_from_dict(io.read_json(args.input))
    violations = [{"invariant": v.invariant, "residual": v.residual, "index": list(v.index)}
                  for v in validate_resolution(R)]
    return io.dumps({"valid": not violations, "violations": violations}) + "\n"


def cmd_oracle(args):
    diagonal, weights = _diagonal_of(args.input, args.symmetrize)
    if args.kind == "entropy":
        res = oracle_entropy_commuting(list(zip(diagonal, weights)))
        witness = None
    elif args.kind == "partition":
        res = oracle_partition_exhaustive(parse_function(args.f), diagonal, weights)
        witness = res.witness
    else:
        if len(diagonal) != 2:
            raise InputError("the Gibbs grid oracle takes 2x2 diagonal densities")
        res = oracle_gibbs_grid(diagonal, weights)
        witness = list(res.witness)
    return io.dumps({"quantity": res.quantity, "value": res.value, "method": res.method,
                     "digest": res.digest, "witness": witness}) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracevar", description="Entropy functionals and variational certificates.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output=True):
        p.add_argument("--symmetrize", action="store_true",
                       help="replace non-Hermitian input x by (x + x*)/2")
        if output:
            p.add_argument("--output", "-o", help="write JSON here instead of stdout")

    p = sub.add_parser("entropy", help="Segal entropy tau(D log D)")
    p.add_argument("--input", required=True)
    common(p)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("renyi", help="Renyi entropy log(tau(D^alpha))/(alpha-1)")
    p.add_argument("--input", required=True)
    p.add_argument("--alpha", type=float, required=True)
    common(p)
    p.set_defaults(func=cmd_renyi)

    p = sub.add_parser("relative", help="relative entropy S(omega, phi)")
    p.add_argument("--omega", required=True)
    p.add_argument("--phi", required=True)
    common(p)
    p.set_defaults(func=cmd_relative)

    p = sub.add_parser("functional", help="tau(f(h)) for a catalog function")
    p.add_argument("--input", required=True)
    p.add_argument("--f", required=True)
    common(p)
    p.set_defaults(func=cmd_functional)

    p = sub.add_parser("certify", help="run a variational certificate")
    p.add_argument("kind", choices=["gibbs", "partition", "segal", "renyi", "subalgebras"])
    p.add_argument("--input", required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--method", choices=["constructive", "ascent"], default="constructive")
    p.add_argument("--f", default="t_log_t")
    p.add_argument("--alpha", type=float)
    p.add_argument("--depth", type=nonneg_int, default=4)
    p.add_argument("--samples", type=nonneg_int, default=1000)
    p.add_argument("--seed", type=seed_type, default=0)
    common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("gen", help="generate a random instance file")
    p.add_argument("kind", choices=["density", "hermitian", "resolution"])
    p.add_argument("--blocks", required=True, help='e.g. "2:1.0,3:0.5"')
    p.add_argument("--seed", type=seed_type, default=0)
    p.add_argument("--cells", type=int, help="number of projections (resolution only)")
    p.add_argument("--rank", type=int, help="rank of the density (density only)")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="check a resolution-of-identity file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", help="brute-force oracle on a diagonal instance (n <= 4)")
    p.add_argument("kind", choices=["entropy", "partition", "gibbs"])
    p.add_argument("--input", required=True)
    p.add_argument("--f", default="t_log_t")
    common(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(io.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        _write(args, args.func(args))
    except PropertyViolation as exc:
        return _fail(EXIT_VIOLATION, exc.code, str(exc))
    except DomainError as exc:
        if exc.code == "support_not_dominated":
            return _fail(EXIT_DOMAIN, exc.code, str(exc))
        return _fail(EXIT_INPUT, exc.code, str(exc))
    except TracevarError as exc:
        return _fail(EXIT_INPUT, exc.code, str(exc))
    except (OSError, ValueError) as exc:
        return _fail(EXIT_INPUT, "input_error", str(exc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
