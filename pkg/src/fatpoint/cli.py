"""Command-line front end: ``fatpoint dim|certify|sweep|selftest``.

Exit codes: 0 ok/certified, 1 usage, 2 probably special, 3 unknown,
4 certification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import secrets
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .certify import (
    Certifier,
    CertificationFailed,
    CertPolicy,
    Family,
    Fixed,
    preset_policy,
    verify_certificate,
)
from .dimensions import SystemSpec, expected_proj_dim, expected_vec_dim, virtual_dim
from .oracle import (
    DEFAULT_PRIME,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    NON_SPECIAL,
    PROBABLY_SPECIAL,
    SECOND_PRIME,
    OracleConfig,
    PrimeField,
    oracle_dim,
    probe_speciality,
)
from .store import NON_SPECIAL as STORE_NON_SPECIAL
from .store import PROBABLY_SPECIAL as STORE_PROBABLY_SPECIAL
from .store import UNKNOWN as STORE_UNKNOWN
from .store import CacheEntry, ResultStore, StoreError

EXIT_OK, EXIT_USAGE, EXIT_SPECIAL, EXIT_UNKNOWN, EXIT_CERT_FAIL = 0, 1, 2, 3, 4

SWEEP_COLUMNS = ["d", "m", "n", "virtual", "expected_vec", "oracle_vec", "status", "cert_method", "wall_time_ms", "error"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    if text == "random":
        return secrets.randbits(32)
    return int(text, 0)


def _range(text: str) -> range:
    """``A:B`` inclusive, or a single integer."""
    lo, sep, hi = text.partition(":")
    try:
        a = int(lo)
        b = int(hi) if sep else a
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}, expected A:B") from None
    return range(a, b + 1)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad list {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prime", type=int, default=DEFAULT_PRIME, help="field prime (< 2^31)")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="random point sets per prime")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="RNG seed, or 'random'")
    p.add_argument("--cache", type=Path, help="JSON-lines result store")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--out", type=Path, help="write output to this file")
    p.add_argument("--max-oracle-cols", type=int, default=500)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fatpoint", description="Dimensions and non-speciality certificates for L_d(m^n).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dim", help="virtual, expected and oracle dimension of L_d(m^n)")
    p.add_argument("d", type=int)
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    _common(p)

    p = sub.add_parser("certify", help="build and verify a non-speciality certificate")
    p.add_argument("d", type=int)
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.add_argument("--factor", type=int, nargs=2, metavar=("N1", "N2"))
    p.add_argument("--oracle-first", action="store_true", help="try a direct oracle witness at the root first")
    p.add_argument("--max-depth", type=int, default=8)
    _common(p)

    p = sub.add_parser("sweep", help="tabulate a range of systems")
    p.add_argument("--d", type=_range, default=range(0, 11), help="degree range A:B (inclusive)")
    p.add_argument("--m", type=_range, default=range(1, 3), help="multiplicity range A:B")
    p.add_argument("--n", type=_int_list, help="comma-separated point counts")
    p.add_argument("--family", help="4^h, 9^h or 4^h*9^k; certifies by degeneration")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="fill wall_time_ms (output no longer byte-stable)")
    _common(p)

    p = sub.add_parser("selftest", help="run invariant grids and acceptance reproductions")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--inject-fault", choices=("claim2-table",), help=argparse.SUPPRESS)
    _common(p)
    return parser


def _oracle_cfg(args) -> OracleConfig:
    try:
        PrimeField(args.prime)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.trials < 0:
        raise UsageError("--trials must be >= 0")
    second = SECOND_PRIME if args.prime != SECOND_PRIME else DEFAULT_PRIME
    return OracleConfig(prime=args.prime, trials=args.trials, seed=args.seed, second_prime=second)


def _spec(args) -> SystemSpec:
    if args.d < 0 or args.m < 0 or args.n < 0:
        raise UsageError("d, m and n must be non-negative")
    spec = SystemSpec(args.d, args.m, args.n)
    if args.prime <= spec.d:
        raise UsageError(f"prime {args.prime} must exceed the degree {spec.d}")
    return spec


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _open_store(args) -> ResultStore | None:
    if args.cache is None:
        return None
    store = ResultStore.load(args.cache)
    for err in store.load_errors:
        print(f"warning: {err}", file=sys.stderr)
    return store


def _oracle_evidence(res, cfg: OracleConfig) -> dict:
    return {
        "kind": "oracle",
        "prime": res.witness.prime if res.witness else cfg.prime,
        "primes": list(res.primes),
        "seed": cfg.seed,
        "trials": cfg.trials,
        "trial_index": res.witness.witness_trial if res.witness else None,
    }


# --- dim ------------------------------------------------------------------


def run_dim(args) -> int:
    cfg = _oracle_cfg(args)
    spec = _spec(args)
    store = _open_store(args)
    res = probe_speciality(spec, cfg)
    vec = res.vec_dim
    report = {
        "d": spec.d,
        "m": spec.m,
        "n": spec.n,
        "virtual": virtual_dim(spec),
        "expected_proj": expected_proj_dim(spec),
        "expected_vec": expected_vec_dim(spec),
        "oracle_vec": vec,
        "oracle_proj": None if vec is None else vec - 1,
        "status": str(res),
        "gap": res.gap,
        "primes": list(res.primes),
        "seed": cfg.seed,
        "trials": cfg.trials,
    }
    if store is not None:
        status = {NON_SPECIAL: STORE_NON_SPECIAL, PROBABLY_SPECIAL: STORE_PROBABLY_SPECIAL}.get(res.kind, STORE_UNKNOWN)
        store.put(CacheEntry(spec, status, _oracle_evidence(res, cfg), gap=res.gap))
        store.save()

    if args.format == "json":
        text = json.dumps(report, indent=2) + "\n"
    elif args.format == "csv":
        cols = ["d", "m", "n", "virtual", "expected_proj", "expected_vec", "oracle_vec", "oracle_proj", "status"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerow(["" if report[c] is None else report[c] for c in cols])
        text = buf.getvalue()
    else:
        rows = [
            ("system", str(spec)),
            ("virtual dim (proj)", report["virtual"]),
            ("expected dim (proj)", report["expected_proj"]),
            ("expected dim (vec)", report["expected_vec"]),
            ("oracle dim (proj)", "-" if vec is None else report["oracle_proj"]),
            ("oracle dim (vec)", "-" if vec is None else vec),
            ("status", report["status"]),
        ]
        text = "".join(f"{k:<22}{v}\n" for k, v in rows)
    _emit(text, args.out)
    return {NON_SPECIAL: EXIT_OK, PROBABLY_SPECIAL: EXIT_SPECIAL}.get(res.kind, EXIT_UNKNOWN)


# --- certify --------------------------------------------------------------


def run_certify(args) -> int:
    cfg = _oracle_cfg(args)
    spec = _spec(args)
    if args.max_depth < 1:
        raise UsageError("--max-depth must be >= 1")
    strategy = "auto"
    if args.factor:
        n1, n2 = args.factor
        if n1 < 2 or n2 < 2 or n1 * n2 != spec.n:
            raise UsageError(f"--factor {n1} {n2} must be a split of n={spec.n} with both parts >= 2")
        strategy = Fixed(n1, n2)
    policy = CertPolicy(
        max_oracle_cols=args.max_oracle_cols,
        factor_strategy=strategy,
        oracle_cfg=cfg,
        max_depth=args.max_depth,
        degenerate_root=not args.oracle_first,
    )
    store = _open_store(args)
    try:
        cert = Certifier(policy, store).certify(spec)
    except CertificationFailed as exc:
        print(f"certification failed for {spec}: {exc.reason}", file=sys.stderr)
        if exc.path:
            print("  path: " + " -> ".join(exc.path), file=sys.stderr)
        return EXIT_CERT_FAIL
    verdict = verify_certificate(cert)
    doc = json.dumps(cert.to_json(), indent=2) + "\n"
    if args.out is not None:
        args.out.write_text(doc, encoding="utf-8")
    if args.format == "json":
        sys.stdout.write(doc)
    else:
        status = "verified" if verdict else f"VERIFICATION FAILED: {verdict.reason}"
        print(f"{spec}: {cert.method}, expected vec dim {expected_vec_dim(spec)}, "
              f"{cert.size} nodes, {status}")
        print(cert.summary())
    if store is not None and verdict:
        store.save()
    if not verdict:
        print(f"verification failed: {verdict.reason} at {' -> '.join(verdict.path)}", file=sys.stderr)
        return EXIT_CERT_FAIL
    return EXIT_OK


# --- sweep ----------------------------------------------------------------


def _sweep_row(spec: SystemSpec, cfg: OracleConfig, certifier: Certifier | None, max_cols: int, timing: bool) -> dict:
    t0 = time.perf_counter()
    row = dict.fromkeys(SWEEP_COLUMNS, "")
    row.update(d=spec.d, m=spec.m, n=spec.n, virtual=virtual_dim(spec), expected_vec=expected_vec_dim(spec))
    try:
        if certifier is None:
            res = probe_speciality(spec, cfg)
            row["oracle_vec"] = "" if res.vec_dim is None else res.vec_dim
            row["status"] = str(res)
            row["cert_method"] = "OracleWitness" if res.kind == NON_SPECIAL else ""
        else:
            try:
                cert = certifier.certify(spec)
            except CertificationFailed as exc:
                res = probe_speciality(spec, cfg)
                row["oracle_vec"] = "" if res.vec_dim is None else res.vec_dim
                row["status"] = str(res)
                row["error"] = str(exc)
            else:
                row["status"] = NON_SPECIAL
                row["cert_method"] = cert.method
                if spec.cols <= max_cols and cfg.trials >= 1:
                    orc = oracle_dim(spec, cfg)
                    row["oracle_vec"] = orc.vec_dim
                    if orc.vec_dim != expected_vec_dim(spec):
                        row["error"] = "oracle disagrees with certificate"
    except Exception as exc:  # recorded per row, the sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    if timing:
        row["wall_time_ms"] = round((time.perf_counter() - t0) * 1000, 1)
    return row


def run_sweep(args) -> int:
    cfg = _oracle_cfg(args)
    if args.family and args.n:
        raise UsageError("give either --n or --family, not both")
    if not args.family and args.n is None:
        raise UsageError("one of --n or --family is required")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    certifier = None
    if args.family:
        try:
            family = Family.parse(args.family)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        ns = [family.n]
        policy = replace_oracle(preset_policy(family), cfg, args.max_oracle_cols)
        certifier = Certifier(policy, _open_store(args))
    else:
        ns = sorted(set(args.n))
    if any(n < 0 for n in ns) or args.d.start < 0 or args.m.start < 0:
        raise UsageError("d, m and n must be non-negative")
    if args.d.stop - 1 >= args.prime:
        raise UsageError("prime must exceed every degree in the sweep")
    specs = [SystemSpec(d, m, n) for d in args.d for m in args.m for n in ns]

    def one(s):
        return _sweep_row(s, cfg, certifier, args.max_oracle_cols, args.timing)

    if args.jobs > 1:
        with ThreadPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(one, specs))
    else:
        rows = [one(s) for s in specs]
    if certifier is not None and args.cache is not None:
        certifier.store.save(args.cache)

    if args.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, SWEEP_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        text = buf.getvalue()
    else:
        cols = [c for c in SWEEP_COLUMNS if c != "wall_time_ms" or args.timing]
        table = [cols] + [[str(r[c]) for c in cols] for r in rows]
        widths = [max(len(line[i]) for line in table) for i in range(len(cols))]
        text = "".join("  ".join(v.ljust(w) for v, w in zip(line, widths)).rstrip() + "\n" for line in table)
    _emit(text, args.out)
    return EXIT_OK if not any(r["error"] for r in rows) else EXIT_CERT_FAIL


def replace_oracle(policy: CertPolicy, cfg: OracleConfig, max_cols: int) -> CertPolicy:
    return replace(policy, oracle_cfg=cfg, max_oracle_cols=max_cols)


# --- selftest -------------------------------------------------------------


def run_selftest(args) -> int:
    from .selftest import run_checks

    results = run_checks(quick=args.quick, inject=args.inject_fault)
    lines = []
    for r in results:
        mark = "PASS" if r.ok else "FAIL"
        lines.append(f"{mark}  {r.name}  ({r.seconds:.2f}s)" + (f"  {r.detail}" if r.detail else ""))
    _emit("\n".join(lines) + "\n", args.out)
    failed = [r for r in results if not r.ok]
    if failed:
        print(f"selftest failed: {failed[0].name}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


COMMANDS = {"dim": run_dim, "certify": run_certify, "sweep": run_sweep, "selftest": run_selftest}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fatpoint {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StoreError as exc:
        print(f"fatpoint {args.command}: store error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
