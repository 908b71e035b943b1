"""Command-line front end.

Subcommands::

    causalcircuit check GRAPH OPERATOR [--inverse]
    causalcircuit decompose GRAPH OPERATOR OUT_CIRCUIT
    causalcircuit verify CIRCUIT OPERATOR
    causalcircuit demo NAME

Exit codes: 0 success, 1 certification or verification failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

from . import zoo
from .causality import CausalityReport, check_causal_heisenberg, check_causal_state_sampled, check_inverse_causal
from .errors import FormatError, LayoutError, LocalizationViolation, NonUnitaryError, VerificationFailure
from .graph import degree_stats
from .localizer import SCHEDULES, Circuit, assemble, check_commutation, depth_bound, verify_representation
from .qca import block_representation, s_stage_is_swap
from .serialize import circuit_to_dict, clean, parse_circuit, parse_graph, parse_operator, write
from .tensor import check_unitary

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

DEMOS = ("shift", "identity", "local-unitary", "partitioned-1d", "partitioned-2d", "controlled-phase", "qca-1d", "counterexample")


class InputError(Exception):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


def causality_to_dict(r: CausalityReport) -> dict:
    return {
        "picture": r.picture.value,
        "overall": r.overall,
        "certified_unitary": r.certified_unitary,
        "max_residual": r.max_residual,
        "failing_nodes": r.failing_nodes,
        "per_node": [
            {"node": v.node, "passed": v.passed, "residual": v.residual, "witness": v.witness} for v in r.per_node
        ],
    }


def degree_dict(g) -> dict:
    out_deg, in_deg, closed = degree_stats(g)
    return {"max_out": out_deg, "max_in": in_deg, "max_closed_in": closed}


def circuit_summary(c: Circuit) -> dict:
    g = c.doubled.base_graph
    bound = depth_bound(g)
    return {
        "depth": c.depth,
        "k_layers": len(c.layers),
        "layer_bound": bound,
        "depth_bound": bound + 2,
        "bound_ok": len(c.layers) <= bound,
        "degree_stats": degree_dict(g),
        "layer_assignment": [[gate.origin_node for gate in layer] for layer in c.layers],
        "max_localization_residual": max((gate.residual for gate in c.gates), default=0.0),
        "max_commutator": check_commutation(c.gates),
        "schedule": c.schedule,
        "uncompute": c.decoding.uncompute,
    }


def _load_pair(graph_path, operator_path):
    g = parse_graph(graph_path)
    U = parse_operator(operator_path, g)
    return g, U


def run_check(args) -> tuple[int, dict]:
    g, U = _load_pair(args.graph, args.operator)
    ok, ures = check_unitary(U, args.tol)
    report = {"command": "check", "inputs": {"graph": args.graph, "operator": args.operator}, "unitarity_residual": ures}
    if not ok:
        report["error"] = "operator is not unitary"
        raise InputError(f"operator is not unitary (residual {ures:.3e})", report)
    heis = check_causal_heisenberg(U, g, args.tol)
    samp = check_causal_state_sampled(U, g, args.samples, args.seed, args.tol)
    report["heisenberg"] = causality_to_dict(heis)
    report["state_sampled"] = causality_to_dict(samp)
    report["degree_stats"] = degree_dict(g)
    causal = heis.overall
    print(f"heisenberg: {'causal' if heis.overall else 'NOT causal'} (max residual {heis.max_residual:.3e})")
    print(f"state-sampled: {'consistent' if samp.overall else 'counterexample found'} (max residual {samp.max_residual:.3e})")
    if heis.overall != samp.overall:
        print("warning: pictures disagree; the sampled check is incomplete", file=sys.stderr)
    if not heis.overall:
        print(f"witness nodes: {heis.failing_nodes}")
    if args.inverse:
        inv = check_inverse_causal(U, g, args.tol)
        report["inverse"] = causality_to_dict(inv)
        print(f"inverse on transposed graph: {'causal' if inv.overall else 'NOT causal'} (max residual {inv.max_residual:.3e})")
        causal = causal and inv.overall
    report["causal"] = causal
    return (EXIT_OK if causal else EXIT_FAIL), report


def run_decompose(args) -> tuple[int, dict]:
    g, U = _load_pair(args.graph, args.operator)
    shape = _parse_shape(args.torus_shape) if args.torus_shape else None
    report = {"command": "decompose", "inputs": {"graph": args.graph, "operator": args.operator}, "schedule": args.schedule}
    try:
        circuit = assemble(U, g, args.tol, args.schedule, shape, uncompute=not args.no_uncompute)
    except LocalizationViolation as e:
        report.update({"decomposed": False, "violation": {"node": e.node, "residual": e.residual}})
        print(f"synthesis failed: {e}")
        return EXIT_FAIL, report
    write(circuit_to_dict(circuit), args.out)
    summary = circuit_summary(circuit)
    report.update({"decomposed": True, "output": args.out, "circuit": summary})
    stats = summary["degree_stats"]
    print(f"depth {summary['depth']} ({summary['k_layers']} K-layers + encode + decode)")
    print(f"degree stats: out {stats['max_out']}, in {stats['max_in']}, closed in {stats['max_closed_in']}")
    print(f"layer bound {summary['layer_bound']}: {'ok' if summary['bound_ok'] else 'EXCEEDED'}")
    return EXIT_OK, report


def run_verify(args) -> tuple[int, dict]:
    circuit = parse_circuit(args.circuit)
    U = parse_operator(args.operator, circuit.doubled.base_graph)
    r = verify_representation(circuit, U, args.samples, args.seed, args.tol, raise_on_failure=False)
    report = {
        "command": "verify",
        "inputs": {"circuit": args.circuit, "operator": args.operator},
        "max_deviation": r.max_deviation,
        "worst_input": r.worst_input,
        "num_inputs": r.num_inputs,
        "passed": r.passed,
    }
    print(f"max deviation {r.max_deviation:.6e} over {r.num_inputs} inputs (worst {r.worst_input})")
    return (EXIT_OK if r.passed else EXIT_FAIL), report


def run_demo(args) -> tuple[int, dict]:
    if args.name not in DEMOS:
        raise InputError(f"unknown demo {args.name!r}; choose from {', '.join(DEMOS)}")
    name = {"shift": "shift-z4", "counterexample": "distant-swap"}.get(args.name, args.name)
    inst = zoo.get(name)
    report = {"command": "demo", "name": args.name, "instance": inst.name}
    heis = check_causal_heisenberg(inst.U, inst.graph, args.tol)
    samp = check_causal_state_sampled(inst.U, inst.graph, args.samples, args.seed, args.tol)
    report["heisenberg"] = causality_to_dict(heis)
    report["state_sampled"] = causality_to_dict(samp)
    print(f"{inst.name}: heisenberg {'causal' if heis.overall else 'NOT causal'}, sampled {'consistent' if samp.overall else 'counterexample'}")
    if not heis.overall:
        try:
            assemble(inst.U, inst.graph, args.tol)
        except LocalizationViolation as e:
            report["violation"] = {"node": e.node, "residual": e.residual}
            print(f"synthesis rejected as expected: {e}")
        return EXIT_FAIL, report
    inv = check_inverse_causal(inst.U, inst.graph, args.tol)
    report["inverse"] = causality_to_dict(inv)
    shape = inst.torus.shape if inst.torus else None
    circuit = assemble(inst.U, inst.graph, args.tol, inst.schedule, shape)
    report["circuit"] = circuit_summary(circuit)
    ver = verify_representation(circuit, inst.U, args.samples, args.seed, args.verify_tol, raise_on_failure=False)
    report["verification"] = {"max_deviation": ver.max_deviation, "worst_input": ver.worst_input, "passed": ver.passed}
    print(f"circuit depth {circuit.depth}, deviation {ver.max_deviation:.3e}")
    ok = inv.overall and ver.passed and report["circuit"]["bound_ok"]
    if inst.torus is not None:
        rep = block_representation(inst.U, inst.torus, args.tol, args.verify_tol, args.samples, args.seed)
        report["block_representation"] = {
            "layers": [list(layer) for layer in rep.layers],
            "translation_deviation": rep.translation_deviation,
            "he_eg_deviation": rep.verification.max_deviation,
            "s_stage_is_swap": s_stage_is_swap(rep),
        }
        print(f"block representation: {len(rep.layers)} layers, HE=EG deviation {rep.verification.max_deviation:.3e}")
        ok = ok and rep.verification.passed and s_stage_is_swap(rep)
    return (EXIT_OK if ok else EXIT_FAIL), report


def _parse_shape(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.lower().split("x"))
    except ValueError:
        raise InputError(f"bad torus shape {text!r}; expected e.g. 2x2") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="causalcircuit", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tol=1e-9):
        sp.add_argument("--tol", type=float, default=tol)
        sp.add_argument("--report", help="write the JSON report here")
        sp.add_argument("--no-timing", action="store_true", help="omit wall-clock timing from the report")

    sp = sub.add_parser("check", help="certify causality of a unitary")
    sp.add_argument("graph")
    sp.add_argument("operator")
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--inverse", action="store_true", help="also certify the adjoint on the transposed graph")
    common(sp)
    sp.set_defaults(func=run_check)

    sp = sub.add_parser("decompose", help="compile a causal unitary into a local circuit")
    sp.add_argument("graph")
    sp.add_argument("operator")
    sp.add_argument("out")
    sp.add_argument("--schedule", choices=SCHEDULES, default="greedy")
    sp.add_argument("--torus-shape", help="axis lengths for --schedule torus-offsets, e.g. 2x2")
    sp.add_argument("--no-uncompute", action="store_true", help="leave U†(⊗q) on the computed tape")
    common(sp)
    sp.set_defaults(func=run_decompose)

    sp = sub.add_parser("verify", help="check a circuit against its unitary")
    sp.add_argument("circuit")
    sp.add_argument("operator")
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    common(sp, tol=1e-8)
    sp.add_argument("--verify-tol", dest="tol", type=float, default=argparse.SUPPRESS)
    sp.set_defaults(func=run_verify)

    sp = sub.add_parser("demo", help="run a named example end to end")
    sp.add_argument("name")
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--verify-tol", type=float, default=1e-8)
    common(sp)
    sp.set_defaults(func=run_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    settings = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "report", "no_timing", "verbose")}
    start = time.perf_counter()
    try:
        code, report = args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        code, report = EXIT_INPUT, dict(e.report, error=str(e))
    except (FormatError, LayoutError, NonUnitaryError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        code, report = EXIT_INPUT, {"command": args.command, "error": str(e)}
    except VerificationFailure as e:
        print(f"error: {e}", file=sys.stderr)
        code, report = EXIT_FAIL, {"command": args.command, "error": str(e), "max_deviation": e.deviation}
    report["settings"] = settings
    report["exit_code"] = code
    if not args.no_timing:
        report["timing"] = {"seconds": time.perf_counter() - start}
    if args.report:
        write(clean(report), args.report)
    return code


if __name__ == "__main__":
    sys.exit(main())
