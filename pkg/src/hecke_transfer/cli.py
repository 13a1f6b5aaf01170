"""Command-line entry points: verify, dump-system, dump-operator, scan, period, hejhal."""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from .group import (
    NotPrimeError,
    check_generators,
    check_identities,
    check_relators,
    generators,
    involution_relators,
    is_prime,
    triple_relators,
)


def _write_atomic(path, text):
    """Write via a temporary file in the same directory, then rename."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(obj, out):
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if out:
        _write_atomic(out, text)
    else:
        sys.stdout.write(text)


def parse_primes(spec):
    """'2..97' or '3,5,7' (mixing allowed); every entry must be prime."""
    out = []
    for part in str(spec).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = (int(v) for v in part.split(".."))
            out.extend(q for q in range(lo, hi + 1) if is_prime(q))
        else:
            q = int(part)
            if not is_prime(q):
                raise NotPrimeError(f"{q} is not prime")
            out.append(q)
    if not out:
        raise ValueError(f"no primes in {spec!r}")
    return sorted(set(out))


def parse_t_range(spec):
    """'lo:hi:steps' for the scan grid."""
    try:
        lo, hi, steps = spec.split(":")
        return float(lo), float(hi), int(steps)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected lo:hi:steps, got {spec!r}") from exc


def _re_s(value):
    v = float(value)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"--re-s must lie strictly between 0 and 1, got {v}")
    return v


def _grid_n(value):
    v = int(value)
    if v < 8:
        raise argparse.ArgumentTypeError(f"N must be at least 8, got {v}")
    return v


def _prime(value):
    v = int(value)
    if not is_prime(v):
        raise argparse.ArgumentTypeError(f"{v} is not prime")
    return v


# commands ---------------------------------------------------------------

def verify_prime(p):
    from .dynamics import build_system, validate_system
    from .transfer import branch_correspondence

    gens = generators(p)
    checks = check_generators(gens)
    rel = check_relators(gens)
    ident = check_identities(gens)
    dyn = validate_system(build_system(p, validate=False))
    failed = [name for name, ok in checks + ident if not ok]
    failed += ["relator " + "*".join(w) for w, ok in rel if not ok]
    failed += dyn
    if not branch_correspondence(p):
        failed.append("branch/operator correspondence")
    return {
        "p": p,
        "involution_relators": len(involution_relators(p)),
        "triple_relators": len(triple_relators(p)),
        "checks": len(checks) + len(rel) + len(ident),
        "failed": failed,
        "ok": not failed,
    }


def cmd_verify(args):
    primes = parse_primes(args.primes)
    reports = [verify_prime(p) for p in primes]
    ok = all(r["ok"] for r in reports)
    _emit({"ok": ok, "primes": reports}, args.out)
    if not ok:
        first = next(r for r in reports if not r["ok"])
        print(f"p={first['p']}: {first['failed'][0]}", file=sys.stderr)
        return 1
    return 0


def cmd_dump_system(args):
    from .dynamics import build_system

    _emit({"p": args.p, "branches": build_system(args.p).to_json()}, args.out)
    return 0


def cmd_dump_operator(args):
    from .transfer import build_transfer, build_transfer_alt_p3

    if args.alt:
        if args.p != 3:
            print("the alternate operator exists only for p = 3", file=sys.stderr)
            return 2
        op = build_transfer_alt_p3()
    else:
        op = build_transfer(args.p)
    _emit(op.to_json(), args.out)
    return 0


def cmd_scan(args):
    from .search import candidates_json, scan_line

    lo, hi, steps = args.t
    res = scan_line(args.p, args.N, args.m, args.re_s, lo, hi, steps, N_confirm=args.n_confirm,
                    threads=args.threads, confirm=not args.no_confirm, extract=not args.no_confirm)
    _write_atomic(args.csv, res.to_csv())
    text = candidates_json(res) + "\n"
    if args.json:
        _write_atomic(args.json, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_period(args):
    from .cohomology import CohomologyError, verification_report
    from .search import NoKernelError, extract_period_function

    s = complex(args.re_s, args.t)
    try:
        res = extract_period_function(args.p, s, args.N, args.m)
    except NoKernelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = {"period_function": res.vector.to_json(), "residuals": res.report()}
    try:
        out["cohomology"] = verification_report(res.vector)
    except CohomologyError as exc:
        out["cohomology"] = {"error": str(exc)}
    if args.compare_choices:
        if args.p != 3:
            print("--compare-choices needs p = 3", file=sys.stderr)
            return 2
        from .transfer import alternate_charts_p3, build_transfer_alt_p3, p3_isomorphism, pointwise_residual
        from .transfer import build_transfer

        f = res.vector
        g = p3_isomorphism(f)
        r0 = pointwise_residual(build_transfer(3), s, f.evaluators(), f.charts) / f.sup_norm()
        r1 = pointwise_residual(build_transfer_alt_p3(), s, g.evaluators(), alternate_charts_p3()) / g.sup_norm()
        out["compare_choices"] = {"residual": r0, "alternate_residual": r1, "ratio": r1 / r0 if r0 else None}
    _emit(out, args.out)
    return 0


def cmd_hejhal(args):
    from .hejhal import hejhal_scan, write_fourier_sum

    if args.model:
        R, eps, parity = args.model.split(",")
        write_fourier_sum(args.out, args.p, float(R), int(eps), int(parity))
        return 0
    lo, hi = (float(v) for v in args.r.split(":"))
    found = hejhal_scan(args.p, lo, hi, args.step)
    _emit({"p": args.p, "eigenvalues": [
        {"R": e.R, "fricke_sign": e.fricke_sign, "parity": e.parity, "mismatch": e.mismatch} for e in found
    ]}, args.out)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="hecke-transfer", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="exact group, dynamics and operator checks")
    v.add_argument("--primes", default="2..97")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("dump-system", help="branch data of the boundary map as JSON")
    d.add_argument("-p", type=_prime, required=True)
    d.add_argument("--out")
    d.set_defaults(func=cmd_dump_system)

    o = sub.add_parser("dump-operator", help="symbolic transfer operator as JSON")
    o.add_argument("-p", type=_prime, required=True)
    o.add_argument("--alt", action="store_true", help="the second p = 3 operator")
    o.add_argument("--out")
    o.set_defaults(func=cmd_dump_operator)

    sc = sub.add_parser("scan", help="sigma_min scan along Re s = re_s")
    sc.add_argument("-p", type=_prime, required=True)
    sc.add_argument("-N", type=_grid_n, default=48)
    sc.add_argument("-m", type=int, default=3)
    sc.add_argument("--re-s", type=_re_s, default=0.5)
    sc.add_argument("--t", type=parse_t_range, default=(0.0, 10.0, 500))
    sc.add_argument("--n-confirm", type=_grid_n, default=64)
    sc.add_argument("--no-confirm", action="store_true")
    sc.add_argument("--threads", type=int)
    sc.add_argument("--csv", default="scan.csv")
    sc.add_argument("--json")
    sc.set_defaults(func=cmd_scan)

    pe = sub.add_parser("period", help="extract and verify a period function")
    pe.add_argument("-p", type=_prime, required=True)
    pe.add_argument("--t", type=float, required=True)
    pe.add_argument("--re-s", type=_re_s, default=0.5)
    pe.add_argument("-N", type=_grid_n, default=64)
    pe.add_argument("-m", type=int, default=3)
    pe.add_argument("--compare-choices", action="store_true")
    pe.add_argument("--out")
    pe.set_defaults(func=cmd_period)

    hj = sub.add_parser("hejhal", help="independent Maass-form solver")
    hj.add_argument("-p", type=_prime, required=True)
    hj.add_argument("--r", default="1:10", help="lo:hi range of spectral parameters")
    hj.add_argument("--step", type=float, default=0.01)
    hj.add_argument("--model", help="R,fricke_sign,parity: write FourierSum coefficients instead")
    hj.add_argument("--out")
    hj.set_defaults(func=cmd_hejhal)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "hejhal" and args.model and not args.out:
        ap.error("--model needs --out")
    try:
        return args.func(args)
    except (NotPrimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
