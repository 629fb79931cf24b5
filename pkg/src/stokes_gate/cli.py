"""Command line front end: ``stokes-gate <command> ...``.

Exit codes: 0 success, 1 bad input, 2 unsupported operator or failed
verification, 3 region outside the certified sector, 4 no irregularity
witness (regular input), 5 oracle cross-check failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from .errors import CertificationFailure, OperatorSyntaxError, PreconditionError, StokesGateError
from .formal import FormalData, classify_singularity, exponential_parts
from .gaussian import GaussianRational
from .intervals import working_digits
from .microsupport import check_witness, irregularity_witness
from .operators import SystemOperator
from .parsing import format_coefficient, format_operator, parse_coefficient, parse_operator
from .sectors import SectorCertificate, certify_sector, select_sector, verify_certificate
from .temperance import Region, filtrant_presentation, tempered_count

EXIT_ORACLE_FAIL = 5


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def _load_system(path: str) -> SystemOperator:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        N = int(data["N"])
        A = tuple(tuple(parse_coefficient(str(e)) for e in row) for row in data["A"])
    except (KeyError, TypeError) as exc:
        raise PreconditionError(f"system file needs keys N and A: {exc}") from exc
    return SystemOperator(N, A)


def _operator_text(op) -> str:
    if isinstance(op, SystemOperator):
        rows = [[format_coefficient(e) for e in row] for row in op.A]
        return f"z^{op.N}*d + A, A = {rows}"
    return format_operator(op)


def _load_operator(args):
    if getattr(args, "system", None):
        return _load_system(args.system)
    if not args.operator:
        raise PreconditionError("one of --operator or --system is required")
    return parse_operator(args.operator)


def _json_arg(text: str):
    if os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            return json.load(fh)
    return json.loads(text)


def analyze_bundle(op, r=Fraction(1, 2)) -> dict:
    fd = exponential_parts(op)
    cls = classify_singularity(fd)
    bundle = {
        "operator": _operator_text(op),
        "l": fd.l,
        "exponential_parts": [format_coefficient(p.as_poly()) for p in fd.parts],
        "formal": fd.to_dict(),
        "classification": {"label": str(cls), "regular": cls.regular,
                           "slopes": [str(s) for s in cls.slopes]},
        "certificate": None,
        "presentation": None,
        "witness": None,
    }
    if not cls.regular:
        cert = select_sector(fd)
        bundle["certificate"] = cert.to_dict()
        bundle["presentation"] = filtrant_presentation(fd, cert).to_dict()
        bundle["witness"] = irregularity_witness(cert, r).to_dict()
    return bundle


def _text_bundle(b: dict) -> str:
    lines = [f"operator: {b['operator']}",
             f"ramification l: {b['l']}",
             "exponential parts: " + ", ".join(b["exponential_parts"]),
             f"classification: {b['classification']['label']}"]
    if b["certificate"]:
        c = b["certificate"]
        lines.append(f"sector: [{c['theta0']['pi_mult']}*pi, {c['theta1']['pi_mult']}*pi], R = {c['R']}")
        for idx in c["indices"]:
            C = f", C = {idx['C']}" if idx["C"] is not None else ""
            lines.append(f"  j={idx['j']}: cond {idx['cond']}{C}")
        lines.append(f"I = {c['I']}, J = {c['J']}")
        p = b["presentation"]
        lines.append(f"filtrant family: {p['family']} (m={p['m']}, n={p['n']})")
        w = b["witness"]
        lines.append(f"witness: delta={w['delta']}, z=({w['z'][0]}, {w['z'][1]}), "
                     f"xi=({w['xi'][0]}, {w['xi'][1]})")
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    bundle = analyze_bundle(_load_operator(args), Fraction(args.r))
    print(_dump(bundle) if args.format == "json" else _text_bundle(bundle))
    return 0


def certificate_for_region(fd: FormalData, V: Region) -> SectorCertificate:
    """Certify the region's own base sector when possible, else the automatic one."""
    s = V.sector
    try:
        return certify_sector(fd, s.theta0, s.theta1, R_max=s.R)
    except (CertificationFailure, PreconditionError):
        return select_sector(fd)


def cmd_count(args) -> int:
    op = _load_operator(args)
    fd = exponential_parts(op)
    V = Region.from_dict(_json_arg(args.region))
    if not fd.nonzero_indices():
        # regular: every exp(-Lambda_j) = 1 is tempered everywhere
        n, J = fd.m, tuple(range(1, fd.m + 1))
        cert = None
    else:
        cert = certificate_for_region(fd, V)
        n, J = tempered_count(fd, cert, V)
    print(_dump({"operator": _operator_text(op), "region": V.to_dict(), "n": n, "J": list(J),
                 "certificate": cert.to_dict() if cert else None}))
    return 0


def cmd_certificate(args) -> int:
    op = _load_operator(args)
    fd = exponential_parts(op)
    r = Fraction(args.r)
    wit = irregularity_witness(fd, r)  # raises NoIrregularityWitness for regular input
    cert = select_sector(fd)
    report = verify_certificate(cert, fd)
    if not report.ok:
        raise CertificationFailure("; ".join(report.failures))
    checks = check_witness(cert, wit.delta, wit.z, wit.xi, r)
    if checks != wit.checks:
        raise CertificationFailure("witness checks changed on re-evaluation")
    doc = {"operator": _operator_text(op), "r": str(r), "certificate": cert.to_dict(),
           "witness": wit.to_dict()}
    text = _dump(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_verify(args) -> int:
    with open(args.file, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("system"):
        raise PreconditionError("verify supports scalar operators only")
    fd = exponential_parts(parse_operator(doc["operator"]))
    cert = SectorCertificate.from_dict(doc["certificate"])
    report = verify_certificate(cert, fd)
    failures = list(report.failures)
    result = {"certificate": report.ok}
    if "witness" in doc:
        w = doc["witness"]
        z = GaussianRational(Fraction(w["z"][0]), Fraction(w["z"][1]))
        xi = GaussianRational(Fraction(w["xi"][0]), Fraction(w["xi"][1]))
        r = Fraction(doc.get("r", "1/2"))
        try:
            checks = check_witness(cert, Fraction(w["delta"]), z, xi, r)
        except PreconditionError as exc:
            checks = {"error": str(exc)}
        ok = checks == {"in_SS_Fdelta": True, "in_Char": False, "in_U": True}
        result["witness"] = ok
        if not ok:
            failures.append(f"witness checks: {checks}")
    result["verified"] = not failures
    result["failures"] = failures
    print(_dump(result))
    return 0 if not failures else CertificationFailure.exit_code


def cmd_oracle(args) -> int:
    from .oracle import crosscheck, default_rays
    op = _load_operator(args)
    fd = exponential_parts(op)
    if fd.nonzero_indices():
        cert = select_sector(fd)
        rays = default_rays(cert, args.rays)
    else:
        cert = None
        rays = [math.pi / 2 * (k + 0.5) / args.rays for k in range(args.rays)]
    report = crosscheck(fd, cert, rays, rho_hi=args.rho_hi, rho_lo=args.rho_lo, tol=args.tol,
                        digits=args.digits or working_digits(), workers=args.workers)
    out = {"operator": _operator_text(op),
           "exponential_parts": [format_coefficient(p.as_poly()) for p in fd.parts]}
    out.update(report)
    print(_dump(out))
    return 0 if report["summary"]["pass"] else EXIT_ORACLE_FAIL


def cmd_plot(args) -> int:
    from . import plotting
    op = _load_operator(args)
    fd = exponential_parts(op)
    if args.what == "growth":
        from .oracle import default_rays, integrate_ray, system_of
        rays = (default_rays(select_sector(fd), 2) if fd.nonzero_indices() else [0.3, 1.0])
        traces = [integrate_ray(system_of(fd), t, digits=args.digits or working_digits())
                  for t in rays]
        plotting.plot_growth(traces, args.out)
    else:
        if not fd.nonzero_indices():
            irregularity_witness(fd, 1)  # raises NoIrregularityWitness
        cert = select_sector(fd)
        if args.what == "sectors":
            plotting.plot_sectors(fd, cert, args.out)
        else:
            plotting.plot_microsupport(cert, irregularity_witness(cert, Fraction(args.r)), args.out)
    print(_dump({"written": args.out, "what": args.what}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stokes-gate",
                                description="Exponential parts, growth sectors, tempered solution "
                                            "counts and irregularity witnesses for linear ODEs at 0.")
    sub = p.add_subparsers(dest="command", required=True)

    def op_args(sp, system=True):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--operator", help='scalar operator, e.g. "z^2*d + 1"')
        if system:
            g.add_argument("--system", metavar="FILE", help='JSON file {"N": int, "A": [[...]]}')

    sp = sub.add_parser("analyze", help="exponential parts, classification, certificate, witness")
    op_args(sp)
    sp.add_argument("--format", choices=["json", "text"], default="json")
    sp.add_argument("--r", default="1/2", help="witness neighbourhood size (rational)")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("count", help="number of tempered solutions on a region")
    op_args(sp)
    sp.add_argument("--region", required=True, help="region JSON text or file")
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("certificate", help="sector certificate and irregularity witness")
    op_args(sp)
    sp.add_argument("--r", default="1/2", help="neighbourhood size (rational)")
    sp.add_argument("--out", help="also write the document to this file")
    sp.set_defaults(func=cmd_certificate)

    sp = sub.add_parser("verify", help="re-check a certificate document")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("oracle", help="numerical growth cross-check")
    op_args(sp)
    sp.add_argument("--rays", type=int, default=2)
    sp.add_argument("--tol", type=float, default=1e-20)
    sp.add_argument("--digits", type=int, default=None)
    sp.add_argument("--rho-hi", type=float, default=10.0)
    sp.add_argument("--rho-lo", type=float, default=0.01)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("plot", help="SVG figure")
    op_args(sp)
    sp.add_argument("--what", choices=["sectors", "growth", "microsupport"], required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--r", default="1/2")
    sp.add_argument("--digits", type=int, default=None)
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StokesGateError as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, OperatorSyntaxError) and exc.offset is not None:
            err["offset"] = exc.offset
        print(_dump(err), file=sys.stderr)
        return exc.exit_code
    except (ValueError, ZeroDivisionError, KeyError, json.JSONDecodeError) as exc:
        print(_dump({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
