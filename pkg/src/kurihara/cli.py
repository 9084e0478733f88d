"""Command-line front end.

Subcommands: check, sieve, theta, delta, search, report, selftest.
Exit codes: 0 success, 2 search exhausted, 3 correctness alarm,
64 usage error, 65 hypothesis failure.
"""

import argparse
import json
import os
import sys

from . import cache as cachemod
from .curve import check_hypotheses, load_curve
from .errors import (
    CorrectnessAlarm,
    HypothesisViolation,
    IdentityFailure,
    KuriharaError,
    SearchExhausted,
)
from .kolyvagin import kurihara_number_direct, kurihara_number_via_ed, sieve
from .mazurtate import theta, vartheta, xi_tilde
from .modsym import build_space, extract_eigensymbol, symbol_from_json, symbol_to_json
from .verifiers import span_two_covering_witness, run_identity_suite, verify_coset_lemma
from .search import attach_parity, find_delta_minimal, selmer_report

EXIT_OK = 0
EXIT_EXHAUSTED = 2
EXIT_ALARM = 3
EXIT_USAGE = 64
EXIT_HYPOTHESIS = 65


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parser():
    common = _Parser(add_help=False)
    common.add_argument("--cache-dir", default=os.environ.get("KURIHARA_CACHE_DIR"))
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)

    p = _Parser(prog="kurihara")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def curve_opts(sp):
        sp.add_argument("--curve", required=True, help="curve JSON file")
        sp.add_argument("--p", type=int, required=True)
        sp.add_argument("--m", type=int, default=1)
        sp.add_argument("--n", type=int, default=0)
        sp.add_argument(
            "--assert-surjective", action="store_true",
            help="assert mod-p surjectivity for this p (hypothesis (b))",
        )
        sp.add_argument(
            "--no-assume-optimal", dest="assume_optimal", action="store_false",
            help="do not assert Gamma0(N)-optimality; skips calibration",
        )

    sp = sub.add_parser("check", parents=[common], help="hypothesis report for (E, p)")
    curve_opts(sp)

    sp = sub.add_parser("sieve", parents=[common], help="list Kolyvagin primes")
    curve_opts(sp)
    sp.add_argument("--bound", type=int, default=10**4)

    sp = sub.add_parser("theta", parents=[common], help="dump theta / vartheta / xi elements")
    curve_opts(sp)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--kind", choices=("theta", "vartheta", "xi"), default="theta")

    sp = sub.add_parser("delta", parents=[common], help="a single Kurihara number")
    curve_opts(sp)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--bound", type=int, default=10**4)

    sp = sub.add_parser("search", parents=[common], help="full delta-minimal search and report")
    curve_opts(sp)
    sp.add_argument("--prime-bound", type=int, default=10**4)
    sp.add_argument("--nu-max", type=int, default=3)
    sp.add_argument("--exhaustive", action="store_true")
    sp.add_argument("--root-number", type=int, choices=(1, -1), default=None)

    sp = sub.add_parser("report", parents=[common], help="re-render and re-verify a saved report")
    sp.add_argument("path")

    sp = sub.add_parser("selftest", parents=[common], help="exhaustive verifiers and identity suite")
    sp.add_argument("--coset-dim", type=int, choices=(3, 4), default=3)
    sp.add_argument("--curve", default=None)
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--grid", type=int, default=60, help="d*l bound for the identity suite")
    return p


def _emit(args, obj, text):
    if args.format == "json":
        print(json.dumps(obj, indent=1, sort_keys=True))
    else:
        print(text)


def _load_curve(args):
    E = load_curve(args.curve)
    if getattr(args, "assert_surjective", False) and args.p not in E.mod_p_surjective:
        import dataclasses

        E = dataclasses.replace(
            E, mod_p_surjective=tuple(E.mod_p_surjective) + (args.p,)
        )
    return E


def _cache(args):
    return cachemod.JsonCache(args.cache_dir) if args.cache_dir else None


def _load_symbol(args, E):
    calibrate = getattr(args, "assume_optimal", True)
    cache = _cache(args)
    key = cachemod.eigensymbol_key(E, calibrate)
    if cache:
        entry = cache.get(key)
        if entry is not None:
            return symbol_from_json(entry, E)
    space = build_space(E.conductor)
    sym = extract_eigensymbol(space, E, calibrate=calibrate)
    if cache:
        cache.put(key, symbol_to_json(sym))
    return sym


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        return _dispatch(args)
    except HypothesisViolation as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except SearchExhausted as exc:
        print(f"search exhausted: {exc}", file=sys.stderr)
        if exc.report is not None:
            print(json.dumps(exc.report.to_json(), indent=1, sort_keys=True))
        return EXIT_EXHAUSTED
    except (CorrectnessAlarm, IdentityFailure) as exc:
        print(f"CORRECTNESS ALARM: {exc}", file=sys.stderr)
        return EXIT_ALARM
    except KuriharaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _dispatch(args):
    cmd = args.command
    if cmd == "selftest":
        rep = verify_coset_lemma(args.coset_dim)
        fns, c, covered = span_two_covering_witness()
        cases = [
            {
                "name": f"coset_lemma_dim{k}",
                "status": "pass" if rep.ok else "fail",
                "instances": n,
            }
            for k, n in rep.instances.items()
        ]
        cases.append({
            "name": "span2_span_two_covering_witness",
            "status": "pass" if covered else "fail",
            "witness": {"functionals": fns, "values": list(c)},
        })
        suites = [{
            "name": "coset_verifier",
            "tests": len(cases),
            "failures": sum(1 for case in cases if case["status"] == "fail"),
            "cases": cases,
        }]
        ok = rep.ok and covered
        if args.curve and args.p:
            E = load_curve(args.curve)
            sym = _load_symbol(args, E)
            suite = run_identity_suite(
                sym, args.p, d_ell_max=args.grid, seed=args.seed
            )
            icases = [
                {
                    "name": name,
                    "status": "pass" if r.ok else "fail",
                    "instances": r.instances,
                    "failures": [str(f) for f in r.failures],
                }
                for name, r in suite.results.items()
            ]
            suites.append({
                "name": "identity_suite",
                "tests": len(icases),
                "failures": sum(1 for case in icases if case["status"] == "fail"),
                "vacuous": suite.vacuous,
                "cases": icases,
            })
            ok = ok and suite.ok
        out = {"suites": suites}
        _emit(args, out, json.dumps(out, indent=1))
        return EXIT_OK if ok else EXIT_ALARM

    if cmd == "report":
        with open(args.path) as f:
            obj = json.load(f)
        p = obj["p"]
        for d in obj["delta_minimal"]:
            row = next(r for r in obj["delta_table"] if r["d"] == d)
            if row["delta"] % p == 0:
                raise CorrectnessAlarm(f"recorded minimal {d} has delta = 0")
            for r in obj["delta_table"]:
                if r["d"] != d and d % r["d"] == 0 and r["delta"] % p != 0:
                    raise CorrectnessAlarm(
                        f"proper divisor {r['d']} of minimal {d} has delta != 0"
                    )
        _emit(args, obj, _report_text(obj))
        return EXIT_OK

    E = _load_curve(args)

    if cmd == "check":
        rep = check_hypotheses(E, args.p)
        _emit(args, rep.to_json(), _hypothesis_text(E, rep))
        return EXIT_OK if rep.passed else EXIT_HYPOTHESIS

    if cmd == "sieve":
        rep = check_hypotheses(E, args.p)
        if not rep.passed:
            raise HypothesisViolation(
                f"hypotheses fail for ({E}, p={args.p}): {rep.to_json()}"
            )
        primes = sieve(E, args.p, args.m, args.n, args.bound, workers=args.workers)
        out = [
            {"ell": kp.ell, "generator": kp.generator, "p_part": kp.p_part_order}
            for kp in primes
        ]
        _emit(args, out, "\n".join(
            f"l = {kp.ell}  h_l = {kp.generator}  |G_l| = {kp.p_part_order}"
            for kp in primes
        ) or "(none)")
        return EXIT_OK

    if cmd == "theta":
        cache = _cache(args)
        key = cachemod.cache_key(
            "theta",
            {
                "curve": str(E), "ainvs": list(E.ainvs()), "kind": args.kind,
                "d": args.d, "n": args.n, "p": args.p, "m": args.m,
                "calibrated": getattr(args, "assume_optimal", True),
            },
        )
        obj = cache.get(key) if cache else None
        if obj is None:
            sym = _load_symbol(args, E)
            if args.kind == "theta":
                el = theta(sym, args.d, args.n, args.p).element
            elif args.kind == "vartheta":
                el = vartheta(sym, args.d, args.n, args.p, args.m)
            else:
                el = xi_tilde(sym, args.d, args.n, args.p, args.m)
            obj = el.to_json()
            if cache:
                cache.put(key, obj)
        _emit(args, obj, json.dumps(obj))
        return EXIT_OK

    if cmd == "delta":
        rep = check_hypotheses(E, args.p)
        if not rep.passed:
            raise HypothesisViolation(
                f"hypotheses fail for ({E}, p={args.p}): {rep.to_json()}"
            )
        sym = _load_symbol(args, E)
        primes = sieve(E, args.p, args.m, args.n, args.bound, workers=args.workers)
        registry = {kp.ell: kp for kp in primes}
        direct = kurihara_number_direct(sym, registry, args.d, args.p, args.m)
        via = kurihara_number_via_ed(sym, registry, args.d, args.p, args.m)
        obj = direct.to_json()
        obj["routes_agree"] = direct.value == via.value
        _emit(args, obj, f"delta_{args.d} = {direct.value} (mod {args.p}^{args.m}),"
                         f" routes_agree={obj['routes_agree']}")
        if not obj["routes_agree"]:
            raise CorrectnessAlarm(f"route disagreement at d={args.d}")
        return EXIT_OK

    if cmd == "search":
        require = check_hypotheses(E, args.p)
        if not require.passed:
            raise HypothesisViolation(
                f"hypotheses fail for ({E}, p={args.p}): {require.to_json()}"
            )
        sym = _load_symbol(args, E)
        cache = _cache(args)
        key = cachemod.cache_key(
            "search",
            {
                "ainvs": list(E.ainvs()), "p": args.p, "m": args.m,
                "prime_bound": args.prime_bound, "nu_max": args.nu_max,
                "exhaustive": args.exhaustive, "root_number": args.root_number,
                "eigensymbol": symbol_to_json(sym),
            },
        )
        obj = cache.get(key) if cache else None
        if obj is None:
            report = find_delta_minimal(
                sym,
                args.p,
                prime_bound=args.prime_bound,
                nu_max=args.nu_max,
                m=args.m,
                exhaustive=args.exhaustive,
                workers=args.workers,
            )
            report = selmer_report(report)
            attach_parity(report, sym, w_override=args.root_number)
            obj = report.to_json()
            text = report.to_text()
            if cache:
                cache.put(key, obj)
        else:
            text = _report_text(obj)
        _emit(args, obj, text)
        return EXIT_OK

    raise AssertionError(f"unhandled command {cmd}")


def _hypothesis_text(E, rep):
    lines = [f"curve {E}, p = {rep.p}:"]
    lines.append(f"  (a) good ordinary: {'ok' if rep.ordinary else 'FAIL'} (a_p = {rep.ap})")
    lines.append(f"  (c) p | #E(F_p): {'ok' if rep.points_ok else 'FAIL'}")
    lines.append(f"  (c) p | Tamagawa: {'ok' if rep.tamagawa_ok else 'FAIL'}")
    lines.append(f"  (b) mod-p surjectivity: {rep.surjectivity}")
    lines.append(f"  overall: {'pass' if rep.passed else 'fail'}")
    return "\n".join(lines)


def _report_text(obj):
    lines = [f"curve {obj['curve']}, p = {obj['p']}"]
    for row in obj["delta_table"]:
        mark = " *" if row["d"] in obj["delta_minimal"] else ""
        lines.append(f"  delta_{row['d']} = {row['delta']}{mark}")
    lines.append(f"selmer_dim = {obj['selmer_dim']}, parity = {obj['parity']}")
    return "\n".join(lines)


if __name__ == "__main__":
    sys.exit(main())
