"""Invariant grids and desk-scale reproductions, runnable from the CLI.

Each check returns ``None`` on success or a string describing the first
counterexample.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

from .certify import DEGENERATION, CertificationFailed, Certifier, Family, preset_policy, verify_certificate
from .dimensions import (
    SystemSpec,
    _third_case_proof_text,
    _third_case_table,
    classify_case,
    dim_L0,
    expected_proj_dim,
    expected_vec_dim,
    image_intersection,
    image_intersection_cases,
    kernel_sum,
    kernel_sum_cases,
    select_k,
    CaseLabel,
)
from .oracle import NON_SPECIAL, PROBABLY_SPECIAL, OracleConfig, oracle_dim, probe_speciality

CLAIM_COUNTS = (4, 9, 16, 25, 36)


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float


@dataclass(frozen=True)
class Grid:
    d_max: int
    m_max: int
    k_m_max: int
    k_n2_max: int
    acc_scale: float  # fraction of the acceptance ranges to run


FULL = Grid(d_max=30, m_max=5, k_m_max=50, k_n2_max=200, acc_scale=1.0)
QUICK = Grid(d_max=12, m_max=3, k_m_max=15, k_n2_max=40, acc_scale=0.4)


def check_vec_proj(g: Grid, **_) -> str | None:
    for d in range(g.d_max + 1):
        for m in range(g.m_max + 1):
            for n in range(0, 40):
                e = expected_proj_dim(d, m, n)
                v = expected_vec_dim(d, m, n)
                if v != (e + 1 if e >= 0 else 0):
                    return f"L_{d}({m}^{n}): vec {v} vs proj {e}"
    return None


def check_select_k(g: Grid, **_) -> str | None:
    for m in range(1, g.k_m_max + 1):
        for n2 in range(1, g.k_n2_max + 1):
            ks = select_k(m, n2).candidates
            big_n = n2 * m * (m + 1)
            disc = 1 + 4 * big_n
            # k >= k_l  <=>  (2k+3)^2 >= disc ; k <= k_u  <=>  (2k+1)^2 <= disc
            # float sqrt only picks the search window; membership is exact
            approx = int(((disc**0.5) - 1) / 2)
            window = range(max(0, approx - 3), approx + 4)
            exact = [k for k in window if (2 * k + 3) ** 2 >= disc and (2 * k + 1) ** 2 <= disc]
            if list(ks) != exact:
                return f"m={m} n2={n2}: {ks} vs bracket {exact}"
            if len(ks) == 2 and ks[1] != ks[0] + 1:
                return f"m={m} n2={n2}: non-consecutive {ks}"
            square = int(disc**0.5 + 0.5) ** 2 == disc
            if (len(ks) == 2) != square:
                return f"m={m} n2={n2}: two candidates iff 1+4N is a square"
    return None


def _claim_grid(g: Grid):
    for d in range(g.d_max + 1):
        for k in range(d + 1):
            for m in range(1, g.m_max + 1):
                for n1 in CLAIM_COUNTS:
                    for n2 in CLAIM_COUNTS:
                        yield d, k, m, n1, n2


def check_claim1(g: Grid, **_) -> str | None:
    for args in _claim_grid(g):
        got = kernel_sum(*args)
        for label, want in kernel_sum_cases(*args):
            if got != want:
                return f"kernel case {label} at {args}: {got} != {want}"
    return None


def check_claim2(g: Grid, third_case=_third_case_table, **_) -> str | None:
    for args in _claim_grid(g):
        got = image_intersection(*args)
        for label, want in image_intersection_cases(*args, third_case=third_case):
            if got != want:
                return f"Claim-2 cross-check: intersection case {label} at {args}: {got} != {want}"
    return None


def check_claim2_sign(g: Grid, **_) -> str | None:
    """The tabulated third case holds; the printed-derivation sign does not."""
    hits = 0
    for args in _claim_grid(g):
        cases = dict(image_intersection_cases(*args))
        if "3" not in cases:
            continue
        d, k, m, n1, n2 = args
        got = image_intersection(*args)
        if got != _third_case_table(d, k, n1):
            return f"table third case fails at {args}"
        if k > 0 and got == _third_case_proof_text(d, k, n1):
            return f"proof-text third case unexpectedly agrees at {args}"
        hits += 1
    return None if hits else "third case never exercised"


def check_theorem2(g: Grid, **_) -> str | None:
    for d in range(g.d_max + 1):
        for m in range(1, g.m_max + 1):
            for n1 in (4, 9):
                for n2 in (4, 9):
                    want = expected_vec_dim(d, m, n1 * n2)
                    for k in select_k(m, n2):
                        if classify_case(d, k, m, n1, n2) is CaseLabel.NONE:
                            return f"case NONE at d={d} k={k} m={m} n1={n1} n2={n2}"
                        got = dim_L0(d, k, m, n1, n2)
                        if got != want:
                            return f"dim_L0={got} != {want} at d={d} k={k} m={m} n1={n1} n2={n2}"
    return None


def check_semicontinuity(g: Grid, **_) -> str | None:
    for d in range(g.d_max + 1):
        for m in range(1, g.m_max + 1):
            for n1 in (4, 9):
                for n2 in (4, 9):
                    want = expected_vec_dim(d, m, n1 * n2)
                    for k in range(d + 1):
                        if dim_L0(d, k, m, n1, n2) < want:
                            return f"dim_L0 below expected at d={d} k={k} m={m} n1={n1} n2={n2}"
    return None


def check_monotone(g: Grid, **_) -> str | None:
    for d in range(g.d_max + 1):
        for k in range(d + 2):
            for n in CLAIM_COUNTS:
                if expected_vec_dim(d, k, n) < expected_vec_dim(d, k + 1, n):
                    return f"multiplicity monotonicity fails at d={d} k={k} n={n}"
                for m in range(1, g.m_max + 1):
                    if expected_vec_dim(k, m, n) < expected_vec_dim(k - 1, m, n):
                        return f"degree monotonicity fails at k={k} m={m} n={n}"
    return None


def check_oracle_bounds(g: Grid, **_) -> str | None:
    cfg = OracleConfig()
    for d in range(0, min(g.d_max, 10) + 1):
        for m in range(1, 4):
            for n in (1, 2, 3, 5, 7):
                s = SystemSpec(d, m, n)
                r = oracle_dim(s, cfg)
                if r.vec_dim < max(s.cols - s.rows, 0) or r.vec_dim < expected_vec_dim(s):
                    return f"{s}: oracle below the lower bound"
                if oracle_dim(s, cfg).vec_dim != r.vec_dim:
                    return f"{s}: oracle not deterministic"
    return None


def _scaled(top: int, scale: float) -> int:
    return max(1, round(top * scale))


def acc_base(n: int, d_top: int, m_top: int):
    def check(g: Grid, **_) -> str | None:
        for d in range(_scaled(d_top, g.acc_scale) + 1):
            for m in range(1, m_top + 1):
                s = SystemSpec(d, m, n)
                r = oracle_dim(s)
                if not r.certified_nonspecial or r.vec_dim != expected_vec_dim(s):
                    return f"{s}: oracle {r.vec_dim} vs expected {expected_vec_dim(s)}"
        return None

    return check


def acc_family(family: Family, d_top: int, ms: tuple[int, ...], need_degeneration: bool):
    def check(g: Grid, **_) -> str | None:
        certifier = Certifier(preset_policy(family))
        for d in range(_scaled(d_top, g.acc_scale) + 1):
            for m in ms:
                s = SystemSpec(d, m, family.n)
                try:
                    cert = certifier.certify(s)
                except CertificationFailed as exc:
                    return f"{s}: {exc}"
                if need_degeneration and cert.method != DEGENERATION:
                    return f"{s}: root is {cert.method}"
                v = verify_certificate(cert)
                if not v:
                    return f"{s}: verification failed: {v.reason}"
                if oracle_dim(s).vec_dim != expected_vec_dim(s):
                    return f"{s}: oracle disagrees with expected dimension"
        return None

    return check


def acc_special(g: Grid, **_) -> str | None:
    for spec in ((2, 2, 2), (4, 2, 5), (6, 4, 3)):
        s = SystemSpec(*spec)
        res = probe_speciality(s)
        if res.kind != PROBABLY_SPECIAL or res.gap != 1 or len(set(res.primes)) < 2:
            return f"{s}: got {res}"
    s = SystemSpec(3, 1, 9)
    if probe_speciality(s).kind != NON_SPECIAL:
        return f"{s}: expected a non-speciality witness"
    return None


CHECKS: list[tuple[str, Callable[..., str | None]]] = [
    ("vec/proj dimension relation", check_vec_proj),
    ("k-selection bracket", check_select_k),
    ("Claim-1 cross-check", check_claim1),
    ("Claim-2 cross-check", check_claim2),
    ("Claim-2 third-case sign", check_claim2_sign),
    ("Theorem-2 consistency", check_theorem2),
    ("semicontinuity bound", check_semicontinuity),
    ("monotonicity", check_monotone),
    ("oracle lower bound and determinism", check_oracle_bounds),
    ("acceptance: base family n=4", acc_base(4, 15, 4)),
    ("acceptance: base family n=9", acc_base(9, 15, 3)),
    ("acceptance: 4^2 via degeneration", acc_family(Family.four_pow(2), 20, (1, 2, 3), True)),
    ("acceptance: 4*9 mixed family", acc_family(Family.mixed(1, 1), 25, (1, 2), False)),
    ("acceptance: special systems", acc_special),
]

FAULTS = {
    # swaps in the sign printed in the worked derivation of the third case
    "claim2-table": {"third_case": _third_case_proof_text},
}


def run_checks(quick: bool = False, inject: str | None = None, names: list[str] | None = None) -> list[CheckResult]:
    g = QUICK if quick else FULL
    kwargs = FAULTS[inject] if inject else {}
    out = []
    for name, fn in CHECKS:
        if names and name not in names:
            continue
        t0 = time.perf_counter()
        try:
            detail = fn(g, **kwargs)
        except Exception as exc:  # a crashing check is a failing check
            detail = f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, detail is None, detail or "", time.perf_counter() - t0))
    return out
