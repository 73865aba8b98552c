"""Command-line front end: file I/O, report generation, exit codes.

Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 input or
schema error, 3 a resource guard tripped. Artifacts written via --emit are
canonical JSON (sorted keys, fixed ordering) and contain no clocks, so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from .builders import (
    build_conjugation_action,
    build_torus_constant_dgla,
    build_toy3,
    build_twisted_dolbeault,
    conjugation_preserves_identity_gram,
)
from .dgla import emit_dgla, parse_dgla, validate_dgla
from .equivariance import (
    GroupAction,
    average_metric,
    check_family_equivariance,
    check_infinitesimal_equivariance,
    emit_action,
    group_closure,
    induced_harmonic_action,
    parse_action,
    validate_action,
)
from .errors import InputError, KforgeError, ResourceGuardError
from .hodge import betti_numbers, hodge_data, metric_to_json, parse_metric
from .kuranishi import family_to_json, gauge_transform, mc_residual, solve_kuranishi
from .linalg import matrix_from_json, matrix_to_json
from .scalars import scalar_from_text, scalar_to_json
from .series import poly_to_json, series_from_json, series_to_json


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"cannot read {path}: file not found") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()[:16]


def _write_artifact(path, document):
    text = json.dumps(document, indent=2, sort_keys=True, ensure_ascii=True) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


class Run:
    """Collects check outcomes and emitted paths for the final summary."""

    def __init__(self, command, inputs):
        self.command = command
        self.inputs = inputs
        self.checks: dict[str, bool] = {}
        self.lines: list[str] = []
        self.artifacts: list[str] = []
        self.started = time.monotonic()

    def check(self, name, passed):
        self.checks[name] = bool(passed)

    def info(self, line):
        self.lines.append(line)

    def emit(self, path, document):
        _write_artifact(path, document)
        self.artifacts.append(path)

    def finish(self):
        print(f"command: {self.command}")
        for path in self.inputs:
            print(f"input: {path} sha256:{_digest(path)}")
        for line in self.lines:
            print(line)
        for name, ok in self.checks.items():
            print(f"check {name}: {'PASS' if ok else 'FAIL'}")
        for path in self.artifacts:
            print(f"artifact: {path}")
        print(f"elapsed: {time.monotonic() - self.started:.3f}s")
        return 0 if all(self.checks.values()) else 1


def _load_dgla_and_metric(args):
    doc = _load_json(args.dgla)
    L = parse_dgla(doc)
    if getattr(args, "metric", None):
        metric = parse_metric(_load_json(args.metric), L.space)
    else:
        metric = parse_metric(doc, L.space)
    return L, metric


def _report_axioms(run, report):
    for check in report.checks:
        run.check(check.name, check.passed)
        if check.skipped:
            run.info(f"note: {check.name} skipped by flag")
        if not check.passed:
            run.info(f"witness {check.name}: {check.witness}; defect = {check.defect}")


def cmd_validate(args):
    run = Run("validate", [args.dgla])
    L = parse_dgla(_load_json(args.dgla))
    report = validate_dgla(L, skip_jacobi=args.skip_jacobi)
    _report_axioms(run, report)
    if args.emit:
        run.emit(
            args.emit,
            {
                "axioms": [
                    {
                        "name": c.name,
                        "passed": c.passed,
                        "skipped": c.skipped,
                        "witness": c.witness,
                        "defect": c.defect,
                    }
                    for c in report.checks
                ],
                "passed": report.passed,
            },
        )
    return run.finish()


def cmd_hodge(args):
    inputs = [args.dgla] + ([args.metric] if args.metric else [])
    run = Run("hodge", inputs)
    L, metric = _load_dgla_and_metric(args)
    H = hodge_data(L, metric)
    betti = betti_numbers(L)
    harmonic = H.harmonic_dims()
    degrees = list(L.space.degrees())
    run.info("betti: " + ", ".join(f"H^{q}={betti[q]}" for q in degrees))
    run.check("splitting_exact", H.splitting_exact())
    run.check("betti_equals_harmonic_dims", all(betti[q] == harmonic[q] for q in degrees))
    if args.emit:
        run.emit(
            args.emit,
            {
                "degrees": degrees,
                "betti": [betti[q] for q in degrees],
                "harmonic_dims": [harmonic[q] for q in degrees],
                "harmonic_basis": [
                    [[scalar_to_json(v) for v in vec] for vec in H.harmonic_basis[q]]
                    for q in degrees
                ],
                "splitting_exact": H.splitting_exact(),
            },
        )
    return run.finish()


def _family_document(family):
    return {
        "parameters": list(family.parameters),
        "order": family.order,
        "alpha": series_to_json(family.alpha)["terms"],
        "obstruction": [poly_to_json(p)["terms"] for p in family.obstruction],
        "ideal_generators": [poly_to_json(p)["terms"] for p in family.ideal_generators],
        "diagnostics": family.diagnostics(),
        "notice": family.notice,
    }


def cmd_kuranishi(args):
    inputs = [args.dgla] + ([args.metric] if args.metric else [])
    run = Run("kuranishi", inputs)
    L, metric = _load_dgla_and_metric(args)
    H = hodge_data(L, metric)
    family = solve_kuranishi(L, H, args.order, max_parameters=args.max_params)
    for warning in family.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if family.notice:
        run.info(f"notice: {family.notice}")
    run.info(f"parameters: {', '.join(family.parameters) or '(none)'}")
    for i, gen in enumerate(family.ideal_generators):
        run.info(f"ideal[{i}]: {gen}")
    if not family.ideal_generators:
        run.info("ideal: (0) - the germ is smooth")
    for name, ok in family.diagnostics().items():
        run.check(name, ok)
    if args.emit:
        run.emit(args.emit, _family_document(family))
    return run.finish()


def cmd_equivariance(args):
    inputs = [args.dgla, args.action] + ([args.metric] if args.metric else [])
    run = Run("equivariance", inputs)
    L, metric = _load_dgla_and_metric(args)
    action = parse_action(_load_json(args.action), L.space)
    if args.average_metric:
        if not isinstance(action, GroupAction):
            raise InputError("--average-metric needs a finite action")
        metric = average_metric(metric, action, args.max_group_size)
        run.info("metric averaged over the group closure")
    H = hodge_data(L, metric)
    report = validate_action(L, metric, action, hodge=H)
    for check in report.checks:
        run.check(f"action_{check.name}_g{check.generator}", check.passed)
        if not check.passed and check.witness:
            run.info(f"witness {check.name} (generator {check.generator}): {check.witness}")
    family = solve_kuranishi(L, H, args.order, max_parameters=args.max_params)
    induced = induced_harmonic_action(H, action)
    for gi, rho in enumerate(induced):
        run.info(f"rho1[g{gi}]: {matrix_to_json(rho.rho1)}")
        run.info(f"rho2[g{gi}]: {matrix_to_json(rho.rho2)}")
    if isinstance(action, GroupAction):
        eq_report = check_family_equivariance(family, action)
    else:
        eq_report = check_infinitesimal_equivariance(family, action)
    for check in eq_report.checks:
        run.check(f"{check.name}_g{check.generator}", check.passed)
        if not check.passed and check.witness:
            run.info(f"witness {check.name} (generator {check.generator}): {check.witness}")
    if args.emit:
        run.emit(
            args.emit,
            {
                "action_checks": [
                    {"name": c.name, "generator": c.generator, "passed": c.passed, "witness": c.witness}
                    for c in report.checks
                ],
                "induced": [
                    {"rho1": matrix_to_json(rho.rho1), "rho2": matrix_to_json(rho.rho2)}
                    for rho in induced
                ],
                "family": _family_document(family),
                "equivariance_checks": [
                    {"name": c.name, "generator": c.generator, "passed": c.passed, "witness": c.witness}
                    for c in eq_report.checks
                ],
                "max_degree_checked": eq_report.max_degree_checked,
            },
        )
    return run.finish()


def cmd_average_metric(args):
    inputs = [args.dgla, args.action] + ([args.metric] if args.metric else [])
    run = Run("average-metric", inputs)
    L, metric = _load_dgla_and_metric(args)
    action = parse_action(_load_json(args.action), L.space)
    if not isinstance(action, GroupAction):
        raise InputError("metric averaging needs a finite action")
    averaged = average_metric(metric, action, args.max_group_size)
    elements = group_closure(action, args.max_group_size)
    run.info(f"group size: {len(elements)}")
    invariant = all(
        g.matrix(q).conjugate_transpose() @ averaged.gram_matrix(q) @ g.matrix(q)
        == averaged.gram_matrix(q)
        for g in elements
        for q in L.space.degrees()
    )
    run.check("averaged_metric_invariant", invariant)
    run.check("averaged_metric_positive_definite", True)  # make_metric validated it
    if args.emit:
        run.emit(args.emit, metric_to_json(averaged))
    return run.finish()


def cmd_gauge(args):
    run = Run("gauge", [args.dgla, args.xi, args.series])
    L, _metric = _load_dgla_and_metric(args)
    xi = series_from_json(_load_json(args.xi), L.space, path="xi")
    s = series_from_json(_load_json(args.series), L.space, path="series")
    transformed = gauge_transform(L, xi, s)
    back = gauge_transform(L, xi.scale(-1), transformed)
    run.check("roundtrip_identity", back == s)
    residual_in = mc_residual(L, s)
    residual_out = mc_residual(L, transformed)
    run.info(f"input_mc_residual_zero: {residual_in.is_zero()}")
    run.info(f"output_mc_residual_zero: {residual_out.is_zero()}")
    run.check("mc_preserved", residual_out.is_zero() or not residual_in.is_zero())
    if args.emit:
        run.emit(args.emit, series_to_json(transformed))
    return run.finish()


def cmd_build(args):
    run = Run(f"build {args.target}", [])
    if args.target == "torus-constants":
        L, metric = build_torus_constant_dgla(args.dim, args.rank)
        run.info(f"dims: {list(L.space.dims)}")
        run.check("axioms", validate_dgla(L).passed)
        if args.emit:
            run.emit(args.emit, emit_dgla(L, metric))
    elif args.target == "twisted":
        twist = scalar_from_text(args.twist)
        L, metric = build_twisted_dolbeault(args.cutoff, twist)
        run.info(f"dims: {list(L.space.dims)}")
        run.info("note: mode eigenvalues use the lattice normalization m1 + i*m2 + twist")
        run.check("axioms", validate_dgla(L).passed)
        if args.emit:
            run.emit(args.emit, emit_dgla(L, metric))
    elif args.target == "toy3":
        L, metric, action = build_toy3()
        run.check("axioms", validate_dgla(L).passed)
        run.check("action_valid", validate_action(L, metric, action).passed)
        if args.emit:
            run.emit(args.emit, emit_dgla(L, metric))
        if args.emit_action:
            run.emit(args.emit_action, emit_action(action))
    elif args.target == "conjugation":
        L, metric = build_torus_constant_dgla(args.dim, args.rank)
        raw = _load_json(args.matrix)
        if isinstance(raw, dict):
            raw = raw.get("matrix")
        h = matrix_from_json(raw, args.rank, args.rank, path="matrix")
        action = build_conjugation_action(L, h)
        run.info(f"identity_gram_invariant: {conjugation_preserves_identity_gram(h)}")
        run.check("action_valid", validate_action(L, metric, action).passed)
        if args.emit:
            run.emit(args.emit, emit_action(action))
    else:  # unreachable: argparse restricts choices
        raise InputError(f"unknown build target {args.target}")
    return run.finish()


def _parser():
    parser = argparse.ArgumentParser(
        prog="kforge",
        description="Exact deformation families for finite-dimensional differential graded Lie algebras",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the four algebra axioms")
    p.add_argument("dgla")
    p.add_argument("--skip-jacobi", action="store_true", help="skip the cubic-cost axiom")
    p.add_argument("--emit", metavar="FILE")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("hodge", help="build the splitting and report cohomology")
    p.add_argument("dgla")
    p.add_argument("--metric", metavar="FILE")
    p.add_argument("--emit", metavar="FILE")
    p.set_defaults(func=cmd_hodge)

    p = sub.add_parser("kuranishi", help="solve the deformation family")
    p.add_argument("dgla")
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--metric", metavar="FILE")
    p.add_argument("--max-params", type=int, default=None)
    p.add_argument("--emit", metavar="FILE")
    p.set_defaults(func=cmd_kuranishi)

    p = sub.add_parser("equivariance", help="certify the family's symmetry")
    p.add_argument("dgla")
    p.add_argument("--action", required=True, metavar="FILE")
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--metric", metavar="FILE")
    p.add_argument("--average-metric", action="store_true")
    p.add_argument("--max-group-size", type=int, default=1024)
    p.add_argument("--max-params", type=int, default=None)
    p.add_argument("--emit", metavar="FILE")
    p.set_defaults(func=cmd_equivariance)

    p = sub.add_parser("average-metric", help="average the metric over the group")
    p.add_argument("dgla")
    p.add_argument("--action", required=True, metavar="FILE")
    p.add_argument("--metric", metavar="FILE")
    p.add_argument("--max-group-size", type=int, default=1024)
    p.add_argument("--emit", metavar="FILE")
    p.set_defaults(func=cmd_average_metric)

    p = sub.add_parser("gauge", help="apply a gauge transformation to a series")
    p.add_argument("dgla")
    p.add_argument("--xi", required=True, metavar="FILE")
    p.add_argument("--series", required=True, metavar="FILE")
    p.add_argument("--metric", metavar="FILE")
    p.add_argument("--emit", metavar="FILE")
    p.set_defaults(func=cmd_gauge)

    p = sub.add_parser("build", help="construct the bundled examples")
    build_sub = p.add_subparsers(dest="target", required=True)

    b = build_sub.add_parser("torus-constants")
    b.add_argument("--dim", type=int, required=True)
    b.add_argument("--rank", type=int, required=True)
    b.add_argument("--emit", metavar="FILE")
    b.set_defaults(func=cmd_build)

    b = build_sub.add_parser("twisted")
    b.add_argument("--cutoff", type=int, required=True)
    b.add_argument("--twist", default="0")
    b.add_argument("--emit", metavar="FILE")
    b.set_defaults(func=cmd_build)

    b = build_sub.add_parser("toy3")
    b.add_argument("--emit", metavar="FILE")
    b.add_argument("--emit-action", metavar="FILE")
    b.set_defaults(func=cmd_build)

    b = build_sub.add_parser("conjugation")
    b.add_argument("--rank", type=int, required=True)
    b.add_argument("--matrix", required=True, metavar="FILE")
    b.add_argument("--dim", type=int, default=2)
    b.add_argument("--emit", metavar="FILE")
    b.set_defaults(func=cmd_build)

    return parser


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, matching the input-error code
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KforgeError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
