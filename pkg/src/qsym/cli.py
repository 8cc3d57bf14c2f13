"""``qsym`` command-line interface.

Exit codes: 0 success, 1 usage error, 2 validation / schema / runtime error,
3 semantic negative result (circuits distinct, test failures). Errors are
written to stderr as one line of JSON: ``{"code", "message", "path"?, "offset"?}``.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .backend import qrun
from .channel import superoperator_to_kraus
from .errors import ExprSyntaxError, QsymError, SchemaError, WidthMismatch
from .io import (
    channel_from_json,
    channel_to_json,
    complex_to_json,
    load_circuit_file,
    load_json,
    matrix_to_json,
    state_to_json,
    vector_to_json,
)
from .random import SeededPRNG, default_source, random_dynamical_matrix, random_ket, random_unitary
from .symexpr import Expr, eval_numeric, is_constant, parse_expr, simplify, to_string
from .testgen import check_equivalence, generate_test_cases, run_suite
from .variational import (
    Objective,
    Observable,
    eval_gradient,
    gradient_parameter_shift,
    gradient_symbolic,
    optimize,
)

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NEGATIVE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, allow_nan=False) + "\n")


def _error(code: str, message: str, path: str | None = None, offset: int | None = None) -> None:
    doc = {"code": code, "message": message}
    if path:
        doc["path"] = path
    if offset is not None:
        doc["offset"] = offset
    sys.stderr.write(json.dumps(doc) + "\n")


def _parse_bindings(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--bind expects sym=expr, got {item!r}")
        name, expr = item.split("=", 1)
        out[name.strip()] = parse_expr(expr)
    return out


def _numeric_bindings(b: dict) -> dict:
    out = {}
    for k, v in b.items():
        if isinstance(v, Expr):
            z = eval_numeric(v, {})
            out[k] = z.real if abs(z.imag) < 1e-15 else z
        else:
            out[k] = v
    return out


def _csv(text: str | None) -> list[float]:
    if text is None or not text.strip():
        return []
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _load(path):
    circuit, noise, bindings = load_circuit_file(path)
    return circuit, noise, bindings


# ---------------------------------------------------------------- commands


def cmd_run(args) -> int:
    circuit, noise, bindings = _load(args.file)
    bindings.update(_parse_bindings(args.bind))
    b = _numeric_bindings(bindings)
    res = qrun(circuit, b, args.backend, args.shots, noise if noise else None, args.seed)
    doc = {
        "counts": dict(sorted(res.counts.items())),
        "shots": args.shots,
        "backend": res.metadata["backend"],
        "seed": args.seed,
        "num_qubits": circuit.num_qubits,
    }
    if res.classical_counts:
        doc["classical_bits"] = res.metadata["classical_bits"]
        doc["classical_counts"] = dict(sorted(res.classical_counts.items()))
    if args.probabilities:
        doc["probabilities"] = [float(p) for p in res.probabilities]
    if args.state and res.final_state is not None:
        doc["final_state"] = state_to_json(res.final_state)
    _emit(doc)
    return EXIT_OK


def _objective(args, circuit, noise):
    obs = Observable.parse(args.observable)
    return Objective(circuit, obs, noise=noise if noise else None, backend="dm-noisy" if noise else "sv-ideal")


def _point(obj, args, bindings) -> np.ndarray:
    if getattr(args, "at", None):
        return np.array(_csv(args.at))
    b = _numeric_bindings(bindings)
    missing = [k for k in obj.parameter_names if k not in b]
    if missing:
        raise SchemaError("/bindings", f"no value for parameters {missing}; use --at or --bind")
    return np.array([float(b[k]) for k in obj.parameter_names])


def cmd_grad(args) -> int:
    circuit, noise, bindings = _load(args.file)
    bindings.update(_parse_bindings(args.bind))
    obj = _objective(args, circuit, noise)
    doc = {"parameters": list(obj.parameter_names), "method": args.method}
    if args.method == "symbolic":
        exprs = gradient_symbolic(obj)
        doc["gradient"] = [to_string(e) for e in exprs]
        if args.at or all(k in bindings for k in obj.parameter_names) and obj.parameter_names:
            doc["values"] = [float(v) for v in eval_gradient(exprs, obj, _point(obj, args, bindings))]
    else:
        x = _point(obj, args, bindings)
        doc["at"] = [float(v) for v in x]
        doc["gradient"] = [float(v) for v in gradient_parameter_shift(obj, x)]
    _emit(doc)
    return EXIT_OK


def cmd_optimize(args) -> int:
    circuit, noise, _ = _load(args.file)
    obj = _objective(args, circuit, noise)
    init = _csv(args.init) if args.init is not None else [0.0] * obj.num_params
    if len(init) != obj.num_params:
        raise UsageError(f"--init needs {obj.num_params} values for {list(obj.parameter_names)}")
    trace = optimize(obj, init, method=args.method, lr=args.lr, budget=args.budget, tol=args.tol)
    doc = {
        "parameters": list(trace.parameter_names),
        "final": [float(v) for v in trace.final.params],
        "value": trace.final.value,
        "terminal_reason": trace.terminal_reason,
        "iterations": len(trace.iterations),
        "trace": [
            {"params": [float(v) for v in it.params], "value": it.value, "gradient_norm": it.gradient_norm}
            for it in trace.iterations
        ],
    }
    _emit(doc)
    return EXIT_OK


def cmd_kraus(args) -> int:
    ch = channel_from_json(load_json(args.input))
    if args.direction == "to-super":
        _emit(channel_to_json(ch, "super"))
    else:
        _emit(channel_to_json(superoperator_to_kraus(ch.as_form("super")), "kraus"))
    return EXIT_OK


def cmd_random(args) -> int:
    src = default_source(args.seed) if args.seed is None else SeededPRNG(args.seed)
    if args.kind == "ket":
        _emit({"kind": "ket", "dim": args.dim, "amplitudes": vector_to_json(random_ket(args.dim, src).numeric())})
    elif args.kind == "unitary":
        _emit({"kind": "unitary", "dim": args.dim, "matrix": matrix_to_json(random_unitary(args.dim, src))})
    else:
        rank = args.rank if args.rank is not None else args.dim * args.dim
        # plain channel JSON so the output feeds straight into ``kraus``
        _emit(channel_to_json(random_dynamical_matrix(args.dim, rank, src), "kraus"))
    return EXIT_OK


def cmd_equiv(args) -> int:
    c1, _, b1 = _load(args.file1)
    c2, _, b2 = _load(args.file2)
    b = _numeric_bindings({**b1, **b2, **_parse_bindings(args.bind)})
    rep = check_equivalence(c1, c2, args.method, args.trials, SeededPRNG(args.seed), b or None)
    _emit(rep.to_json())
    return EXIT_OK if rep.equivalent else EXIT_NEGATIVE


def cmd_testgen(args) -> int:
    circuit, _, bindings = _load(args.file)
    bindings.update(_parse_bindings(args.bind))
    b = _numeric_bindings(bindings)
    cases = generate_test_cases(circuit, args.strategy, k=args.k, src=SeededPRNG(args.seed), binding=b or None)
    doc = {"strategy": args.strategy, "num_qubits": circuit.num_qubits, "cases": [c.to_json() for c in cases]}
    if not (args.check or args.against):
        _emit(doc)
        return EXIT_OK
    target = circuit.bind(b) if b else circuit
    if args.against:
        other, _, other_bindings = _load(args.against)
        other_b = _numeric_bindings({**other_bindings, **_parse_bindings(args.bind)})
        target = other.bind(other_b) if other_b else other
        if target.num_qubits != circuit.num_qubits:
            raise WidthMismatch(f"circuits act on {circuit.num_qubits} and {target.num_qubits} qubits")
        doc["against"] = args.against
    results = run_suite(target, cases)
    doc["results"] = [r.to_json() for r in results]
    doc["passed"] = all(r.passed for r in results)
    _emit(doc)
    return EXIT_OK if doc["passed"] else EXIT_NEGATIVE


def cmd_simplify(args) -> int:
    e = simplify(parse_expr(args.expr))
    if args.json:
        doc = {"expr": to_string(e)}
        if is_constant(e):
            doc["value"] = complex_to_json(eval_numeric(e, {}))
        _emit(doc)
    else:
        sys.stdout.write(to_string(e) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qsym", description="Symbolic and numeric quantum programming toolkit.")
    p.add_argument("--version", action="version", version=f"qsym {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    r = sub.add_parser("run", help="simulate a circuit file and sample measurement counts")
    r.add_argument("file")
    r.add_argument("--backend", default="sv-ideal")
    r.add_argument("--shots", type=int, default=1024)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--bind", action="append", metavar="SYM=EXPR")
    r.add_argument("--state", action="store_true", help="include the final state")
    r.add_argument("--probabilities", action="store_true", help="include exact basis probabilities")
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("grad", help="gradient of an observable's expectation")
    g.add_argument("file")
    g.add_argument("--observable", required=True, metavar="SPEC")
    g.add_argument("--method", choices=["shift", "symbolic"], default="shift")
    g.add_argument("--at", metavar="CSV", help="parameter values in lexicographic symbol order")
    g.add_argument("--bind", action="append", metavar="SYM=EXPR")
    g.set_defaults(func=cmd_grad)

    o = sub.add_parser("optimize", help="minimise an observable's expectation")
    o.add_argument("file")
    o.add_argument("--observable", required=True, metavar="SPEC")
    o.add_argument("--init", metavar="CSV")
    o.add_argument("--budget", type=int, default=100)
    o.add_argument("--tol", type=float, default=1e-6)
    o.add_argument("--lr", type=float, default=0.1)
    o.add_argument("--method", choices=["gradient_descent", "adaptive"], default="gradient_descent")
    o.set_defaults(func=cmd_optimize)

    k = sub.add_parser("kraus", help="convert channel representations")
    k.add_argument("direction", choices=["to-super", "to-kraus"])
    k.add_argument("--in", dest="input", required=True, metavar="FILE")
    k.set_defaults(func=cmd_kraus)

    rd = sub.add_parser("random", help="sample random kets, unitaries or channels")
    rd.add_argument("kind", choices=["ket", "unitary", "channel"])
    rd.add_argument("--dim", type=int, required=True)
    rd.add_argument("--rank", type=int)
    rd.add_argument("--seed", type=int)
    rd.set_defaults(func=cmd_random)

    e = sub.add_parser("equiv", help="check two circuit files for equivalence")
    e.add_argument("file1")
    e.add_argument("file2")
    e.add_argument("--method", choices=["exact_matrix", "randomized_states", "symbolic"], default="exact_matrix")
    e.add_argument("--trials", type=int, default=8)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--bind", action="append", metavar="SYM=EXPR")
    e.set_defaults(func=cmd_equiv)

    t = sub.add_parser("testgen", help="generate (and optionally run) test cases for a circuit")
    t.add_argument("file")
    t.add_argument("--strategy", choices=["basis", "symbolic_family", "random_kets"], default="basis")
    t.add_argument("--k", type=int, default=5, help="number of Haar inputs for random_kets")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--check", action="store_true")
    t.add_argument("--against", metavar="FILE", help="run the suite on this circuit instead (implies --check)")
    t.add_argument("--bind", action="append", metavar="SYM=EXPR")
    t.set_defaults(func=cmd_testgen)

    s = sub.add_parser("simplify", help="print the canonical form of an expression")
    s.add_argument("expr")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_simplify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _error("usage", str(exc))
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        _error("usage", str(exc))
        return EXIT_USAGE
    except ExprSyntaxError as exc:
        _error(exc.code, str(exc), getattr(exc, "path", None), exc.offset)
        return EXIT_INVALID
    except QsymError as exc:
        _error(exc.code, str(exc), getattr(exc, "path", None))
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
