"""Recursive non-speciality certificates for L_d(m^(n1 n2)).

A Degeneration node splits ``n = n1*n2`` points into ``n1`` clusters of
``n2``, picks the twist ``k`` from :func:`select_k`, and reduces the claim to
four smaller systems

    L_d((k+1)^n1), L_d(k^n1), L_{k-1}(m^n2), L_k(m^n2).

If those are non-special, the limit system has dimension ``dim_L0``, which
equals the expected dimension of L_d(m^n); by upper semicontinuity the
general system is then non-special too.  Leaves are oracle rank witnesses or
trivial systems, so every certificate is finite and re-checkable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Iterable

from .dimensions import (
    CaseLabel,
    SystemSpec,
    classify_case,
    dim_L0,
    expected_vec_dim,
    select_k,
)
from .oracle import OracleConfig, PrimeField, oracle_dim, trial_rank
from .store import NON_SPECIAL, CacheEntry, ResultStore

log = logging.getLogger(__name__)

CERT_VERSION = "cert-v1"

ORACLE_WITNESS = "OracleWitness"
DEGENERATION = "Degeneration"
TRIVIAL_EMPTY = "TrivialEmpty"
TRIVIAL_FULL = "TrivialFull"
METHODS = (ORACLE_WITNESS, DEGENERATION, TRIVIAL_EMPTY, TRIVIAL_FULL)


class CertificationFailed(Exception):
    def __init__(self, reason: str, path: tuple[str, ...] = ()):
        self.reason = reason
        self.path = path
        where = " -> ".join(path)
        super().__init__(f"{reason} at {where}" if where else reason)


@dataclass(frozen=True)
class Certificate:
    spec: SystemSpec
    method: str
    prime: int | None = None
    seed: int | None = None
    trial_index: int | None = None
    n1: int | None = None
    n2: int | None = None
    k: int | None = None
    case: CaseLabel | None = None
    dim_L0: int | None = None
    children: tuple["Certificate", ...] = ()

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown certificate method {self.method!r}")

    def nodes(self) -> Iterable["Certificate"]:
        yield self
        for c in self.children:
            yield from c.nodes()

    @property
    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    @property
    def depth(self) -> int:
        return 1 + max((c.depth for c in self.children), default=0)

    def to_json(self, root: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if root:
            out["version"] = CERT_VERSION
        out.update(
            spec=self.spec.as_dict(),
            method=self.method,
            k=self.k,
            case=self.case.value if self.case is not None else None,
            n1=self.n1,
            n2=self.n2,
            dim_L0=self.dim_L0,
            prime=self.prime,
            seed=self.seed,
            trial_index=self.trial_index,
            children=[c.to_json(root=False) for c in self.children],
        )
        return out

    @classmethod
    def from_json(cls, obj: dict[str, Any], root: bool = True) -> "Certificate":
        if root and obj.get("version") != CERT_VERSION:
            raise ValueError(f"not a {CERT_VERSION} document (version={obj.get('version')!r})")
        s = obj["spec"]
        case = obj.get("case")
        return cls(
            spec=SystemSpec(int(s["d"]), int(s["m"]), int(s["n"])),
            method=obj["method"],
            prime=obj.get("prime"),
            seed=obj.get("seed"),
            trial_index=obj.get("trial_index"),
            n1=obj.get("n1"),
            n2=obj.get("n2"),
            k=obj.get("k"),
            case=CaseLabel(case) if case is not None else None,
            dim_L0=obj.get("dim_L0"),
            children=tuple(cls.from_json(c, root=False) for c in obj.get("children") or ()),
        )

    def describe(self) -> str:
        if self.method == DEGENERATION:
            return (
                f"{self.spec} {self.method} n1={self.n1} n2={self.n2} k={self.k} "
                f"case={self.case.value} dim_L0={self.dim_L0}"
            )
        if self.method == ORACLE_WITNESS:
            return f"{self.spec} {self.method} p={self.prime} seed={self.seed} trial={self.trial_index}"
        return f"{self.spec} {self.method}"

    def summary(self, indent: str = "  ") -> str:
        lines = []

        def walk(c: Certificate, level: int) -> None:
            lines.append(indent * level + c.describe())
            for ch in c.children:
                walk(ch, level + 1)

        walk(self, 0)
        return "\n".join(lines)


def theorem_subspecs(d: int, m: int, n1: int, n2: int, k: int) -> tuple[SystemSpec, ...]:
    """The four systems a degeneration step depends on, in canonical order."""
    return (
        SystemSpec(d, k + 1, n1),
        SystemSpec(d, k, n1),
        SystemSpec(k - 1, m, n2),
        SystemSpec(k, m, n2),
    )


# --- factor strategies ----------------------------------------------------


@dataclass(frozen=True)
class Fixed:
    n1: int
    n2: int


@dataclass(frozen=True)
class Peel:
    """Split off one base factor at a time (n1 in bases first, then n2)."""

    bases: tuple[int, ...] = (4, 9)


AUTO = "auto"


def factor_pairs(n: int) -> list[tuple[int, int]]:
    """All (n1, n2) with n1*n2 = n and both >= 2, balanced splits first."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    pairs = [(a, n // a) for a in range(2, n // 2 + 1) if n % a == 0 and n // a >= 2]
    return sorted(pairs, key=lambda p: (max(p), p[0]))


def peel_pairs(n: int, bases: Iterable[int]) -> list[tuple[int, int]]:
    bases = tuple(bases)
    first = [(b, n // b) for b in bases if n % b == 0 and n // b >= 2]
    second = [(n // b, b) for b in bases if n % b == 0 and n // b >= 2]
    out: list[tuple[int, int]] = []
    for p in first + second:
        if p not in out:
            out.append(p)
    return out


@dataclass(frozen=True)
class CertPolicy:
    max_oracle_cols: int = 500
    # above this point count the oracle is skipped whenever a split exists
    max_oracle_points: int | None = None
    factor_strategy: str | Fixed | Peel = AUTO
    oracle_cfg: OracleConfig = field(default_factory=OracleConfig)
    max_depth: int = 8
    # try a degeneration at the root before the oracle
    degenerate_root: bool = False

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        fs = self.factor_strategy
        if not (fs == AUTO or isinstance(fs, (Fixed, Peel))):
            raise ValueError(f"unknown factor strategy {fs!r}")

    def pairs(self, n: int, at_root: bool) -> list[tuple[int, int]]:
        fs = self.factor_strategy
        if isinstance(fs, Fixed):
            if at_root:
                if fs.n1 * fs.n2 != n:
                    raise ValueError(f"fixed split {fs.n1}x{fs.n2} does not multiply to n={n}")
                return [(fs.n1, fs.n2)]
            return factor_pairs(n)
        if isinstance(fs, Peel):
            return peel_pairs(n, fs.bases)
        return factor_pairs(n)


# --- certification --------------------------------------------------------


def _cost(s: SystemSpec) -> int:
    return s.rows * s.cols


class Certifier:
    """Stateful driver for :func:`certify`, sharing a memo across calls."""

    def __init__(self, policy: CertPolicy = CertPolicy(), store: ResultStore | None = None):
        self.policy = policy
        self.store = store if store is not None else ResultStore()
        self._trusted: dict[SystemSpec, Certificate] = {}
        self._no_witness: set[SystemSpec] = set()

    def certify(self, spec: SystemSpec) -> Certificate:
        return self._node(spec, 0, (str(spec),))

    def _remember(self, cert: Certificate) -> Certificate:
        self._trusted[cert.spec] = cert
        if cert.method in (ORACLE_WITNESS, DEGENERATION):
            evidence = {"kind": "certificate", "certificate": cert.to_json()}
            self.store.put(CacheEntry(cert.spec, NON_SPECIAL, evidence))
        return cert

    def _from_store(self, spec: SystemSpec) -> Certificate | None:
        if spec in self._trusted:
            return self._trusted[spec]
        entry = self.store.get(spec)
        if entry is None or entry.status != NON_SPECIAL or not entry.evidence:
            return None
        ev = entry.evidence
        try:
            if ev.get("kind") == "certificate":
                cert = Certificate.from_json(ev["certificate"])
            elif ev.get("kind") == "oracle" and ev.get("trial_index") is not None:
                cert = Certificate(spec, ORACLE_WITNESS, prime=ev["prime"], seed=ev["seed"], trial_index=ev["trial_index"])
            else:
                return None
        except (KeyError, ValueError, TypeError) as exc:
            log.warning("unusable store evidence for %s: %s", spec, exc)
            return None
        # entries read from disk are re-checked once before use
        verdict = verify_certificate(cert)
        if not verdict or cert.spec != spec:
            log.warning("store evidence for %s failed verification: %s", spec, verdict.reason)
            return None
        self._trusted[spec] = cert
        return cert

    def _oracle(self, spec: SystemSpec) -> Certificate | None:
        cfg = self.policy.oracle_cfg
        if cfg.trials < 1 or spec in self._no_witness:
            return None
        res = oracle_dim(spec, cfg)
        if not res.certified_nonspecial:
            self._no_witness.add(spec)
            return None
        return Certificate(spec, ORACLE_WITNESS, prime=res.prime, seed=res.seed, trial_index=res.witness_trial)

    def _node(self, spec: SystemSpec, depth: int, path: tuple[str, ...]) -> Certificate:
        if spec.d < 0:
            return Certificate(spec, TRIVIAL_EMPTY)
        if spec.m == 0 or spec.n == 0:
            return Certificate(spec, TRIVIAL_FULL)

        at_root = depth == 0
        degen_first = at_root and self.policy.degenerate_root
        if not degen_first:
            hit = self._from_store(spec)
            if hit is not None:
                return hit

        pairs = self.policy.pairs(spec.n, at_root)
        oracle_ok = spec.cols <= self.policy.max_oracle_cols
        cap = self.policy.max_oracle_points
        if pairs and cap is not None and spec.n > cap:
            oracle_ok = False
        if oracle_ok and not degen_first:
            cert = self._oracle(spec)
            if cert is not None:
                return self._remember(cert)

        failure: CertificationFailed | None = None
        if pairs and depth >= self.policy.max_depth:
            failure = CertificationFailed("depth exceeded", path)
            pairs = []
        for n1, n2 in pairs:
            try:
                return self._remember(self._degenerate(spec, n1, n2, depth, path))
            except CertificationFailed as exc:
                failure = exc

        if degen_first and oracle_ok:
            cert = self._oracle(spec)
            if cert is not None:
                return self._remember(cert)

        if failure is not None:
            raise failure
        if not oracle_ok:
            raise CertificationFailed("no factorization and oracle too large", path)
        raise CertificationFailed("oracle found no witness and no factorization applies", path)

    def _degenerate(self, spec: SystemSpec, n1: int, n2: int, depth: int, path: tuple[str, ...]) -> Certificate:
        d, m = spec.d, spec.m
        target = expected_vec_dim(spec)
        failure = CertificationFailed(f"no admissible k for split {n1}x{n2}", path)
        for k in select_k(m, n2):
            value = dim_L0(d, k, m, n1, n2)
            case = classify_case(d, k, m, n1, n2)
            if case is CaseLabel.NONE or value != target:
                continue
            subs = theorem_subspecs(d, m, n1, n2, k)
            done: dict[SystemSpec, Certificate] = {}
            try:
                for s in sorted(set(subs), key=_cost):
                    done[s] = self._node(s, depth + 1, path + (str(s),))
            except CertificationFailed as exc:
                failure = CertificationFailed(f"sub-system certification failed: {exc.reason}", exc.path)
                log.debug("split %dx%d k=%d of %s failed: %s", n1, n2, k, spec, exc)
                continue
            return Certificate(
                spec,
                DEGENERATION,
                n1=n1,
                n2=n2,
                k=k,
                case=case,
                dim_L0=value,
                children=tuple(done[s] for s in subs),
            )
        raise failure


def certify(spec: SystemSpec, policy: CertPolicy = CertPolicy(), store: ResultStore | None = None) -> Certificate:
    """Certify that ``spec`` is non-special, or raise :class:`CertificationFailed`.

    Order of attempts: trivial systems, the store, a direct oracle witness
    (if the matrix has at most ``policy.max_oracle_cols`` columns), then
    degenerations over the policy's factor pairs and both k candidates.
    """
    return Certifier(policy, store).certify(spec)


# --- verification ---------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""
    path: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def verify_certificate(cert: Certificate, check_oracle: bool = True) -> Verdict:
    """Re-derive every claim in ``cert`` from scratch.

    Arithmetic claims are recomputed with the dimension calculus; oracle
    leaves are re-run from their (prime, seed, trial) and must reach the
    expected rank.
    """
    ranks: dict[tuple, int] = {}

    def fail(why: str, path) -> Verdict:
        return Verdict(False, why, path)

    def walk(c: Certificate, path: tuple[str, ...]) -> Verdict:
        path = path + (str(c.spec),)
        s = c.spec
        if c.method == TRIVIAL_EMPTY:
            if s.d >= 0 or expected_vec_dim(s) != 0:
                return fail("TrivialEmpty needs negative degree", path)
            return Verdict(True)
        if c.method == TRIVIAL_FULL:
            if s.d < 0 or not (s.m == 0 or s.n == 0):
                return fail("TrivialFull needs m = 0 or n = 0", path)
            return Verdict(True)
        if c.children and c.method != DEGENERATION:
            return fail("leaf carries children", path)
        if c.method == ORACLE_WITNESS:
            if s.d < 0 or c.prime is None or c.seed is None or c.trial_index is None:
                return fail("incomplete oracle witness", path)
            if not check_oracle:
                return Verdict(True)
            try:
                PrimeField(c.prime)
                key = (s, c.prime, c.seed, c.trial_index)
                if key not in ranks:
                    ranks[key] = trial_rank(s, c.prime, c.seed, c.trial_index)
            except ValueError as exc:
                return fail(f"oracle witness not reproducible: {exc}", path)
            if s.cols - ranks[key] != expected_vec_dim(s):
                return fail(f"oracle rank {ranks[key]} does not reach expected dimension", path)
            return Verdict(True)

        # Degeneration
        if None in (c.n1, c.n2, c.k, c.case, c.dim_L0):
            return fail("incomplete degeneration node", path)
        if s.d < 0 or s.m < 1:
            return fail("degeneration needs d >= 0 and m >= 1", path)
        if c.n1 < 2 or c.n2 < 2 or c.n1 * c.n2 != s.n:
            return fail(f"split {c.n1}x{c.n2} does not factor n={s.n}", path)
        if c.k not in select_k(s.m, c.n2):
            return fail(f"k={c.k} outside the admissible bracket for m={s.m}, n2={c.n2}", path)
        case = classify_case(s.d, c.k, s.m, c.n1, c.n2)
        if case is CaseLabel.NONE or case != c.case:
            return fail(f"case {c.case} does not match recomputed {case.value}", path)
        value = dim_L0(s.d, c.k, s.m, c.n1, c.n2)
        if value != c.dim_L0 or value != expected_vec_dim(s):
            return fail(f"dim_L0 {c.dim_L0} vs recomputed {value}, expected {expected_vec_dim(s)}", path)
        subs = theorem_subspecs(s.d, s.m, c.n1, c.n2, c.k)
        if tuple(ch.spec for ch in c.children) != subs:
            return fail("children do not match the four required sub-systems", path)
        for ch in c.children:
            v = walk(ch, path)
            if not v:
                return v
        return Verdict(True)

    return walk(cert, ())


# --- family presets -------------------------------------------------------


@dataclass(frozen=True)
class Family:
    """Point counts 4^fours * 9^nines."""

    fours: int = 0
    nines: int = 0

    @classmethod
    def four_pow(cls, h: int) -> "Family":
        if h < 1:
            raise ValueError("h must be >= 1")
        return cls(h, 0)

    @classmethod
    def nine_pow(cls, h: int) -> "Family":
        if h < 1:
            raise ValueError("h must be >= 1")
        return cls(0, h)

    @classmethod
    def mixed(cls, h: int, k: int) -> "Family":
        if h < 1 or k < 0:
            raise ValueError("need h >= 1 and k >= 0")
        return cls(h, k)

    @classmethod
    def parse(cls, text: str) -> "Family":
        """Parse ``4^2``, ``9^1`` or ``4^1*9^1``."""
        fours = nines = 0
        for part in text.replace(" ", "").split("*"):
            base, _, exp = part.partition("^")
            e = int(exp) if exp else 1
            if base == "4":
                fours += e
            elif base == "9":
                nines += e
            else:
                raise ValueError(f"family base must be 4 or 9, got {part!r}")
        if fours + nines < 1:
            raise ValueError(f"empty family {text!r}")
        return cls(fours, nines)

    @property
    def n(self) -> int:
        return 4**self.fours * 9**self.nines

    def __str__(self) -> str:
        parts = [f"{b}^{e}" for b, e in ((4, self.fours), (9, self.nines)) if e]
        return "*".join(parts)


def preset_policy(family: Family, base: CertPolicy = CertPolicy()) -> CertPolicy:
    composite = family.fours + family.nines > 1
    return replace(base, factor_strategy=Peel((4, 9)), degenerate_root=composite, max_oracle_points=9)


@dataclass
class FamilyRow:
    spec: SystemSpec
    ok: bool
    method: str | None = None
    size: int = 0
    reason: str = ""
    certificate: Certificate | None = None


@dataclass
class FamilyReport:
    family: Family
    rows: list[FamilyRow]

    @property
    def all_certified(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def failures(self) -> list[FamilyRow]:
        return [r for r in self.rows if not r.ok]


def preset_family(
    family: Family,
    d_max: int,
    m_max: int,
    policy: CertPolicy | None = None,
    store: ResultStore | None = None,
) -> FamilyReport:
    """Certify L_d(m^n) for 0 <= d <= d_max, 1 <= m <= m_max, n = family.n."""
    pol = preset_policy(family, policy or CertPolicy())
    certifier = Certifier(pol, store)
    rows = []
    for d in range(d_max + 1):
        for m in range(1, m_max + 1):
            spec = SystemSpec(d, m, family.n)
            try:
                cert = certifier.certify(spec)
            except CertificationFailed as exc:
                rows.append(FamilyRow(spec, False, reason=str(exc)))
                continue
            rows.append(FamilyRow(spec, True, cert.method, cert.size, certificate=cert))
    return FamilyReport(family, rows)
