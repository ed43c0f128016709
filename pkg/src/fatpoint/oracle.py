"""Generic dimension of L_d(m^n) by exact rank over a prime field.

Curves of degree d are encoded by their coefficient vectors in the monomial
basis x^i y^j (i + j <= d) of the affine chart.  A point of multiplicity m
contributes one row per Hasse derivative of order (a, b) with a + b < m.
The rank over F_p at integer points never exceeds the rank over Q at the
same points, which never exceeds the generic rank, so a trial that reaches
the expected rank proves the system non-special in characteristic 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .dimensions import SystemSpec, binom, expected_vec_dim

log = logging.getLogger(__name__)

DEFAULT_PRIME = 2147483647
SECOND_PRIME = 2147483629
DEFAULT_SEED = 0xF47
DEFAULT_TRIALS = 3

# entries stay below 2**31, so a product of two fits in int64
_MAX_PRIME = 2**31


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    # deterministic Miller-Rabin for p < 3.3e24
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        if a % p == 0:
            continue
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeField:
    p: int = DEFAULT_PRIME

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.p >= _MAX_PRIME:
            raise ValueError(f"prime {self.p} too large for int64 elimination (need p < 2**31)")


@dataclass(frozen=True)
class OracleConfig:
    prime: int = DEFAULT_PRIME
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    second_prime: int = SECOND_PRIME


@dataclass
class PointConfig:
    points: np.ndarray  # shape (n, 2), int64, entries in [1, p-1]
    seed: int
    trial_index: int = 0


@dataclass
class OracleResult:
    spec: SystemSpec
    vec_dim: int
    certified_nonspecial: bool
    trials_run: int
    prime: int
    seed: int
    witness_trial: int | None = None
    ranks: list[int] = field(default_factory=list)

    @property
    def expected(self) -> int:
        return expected_vec_dim(self.spec)


@lru_cache(maxsize=None)
def _basis(d: int) -> tuple[tuple[int, int], ...]:
    return tuple((t - j, j) for t in range(d + 1) for j in range(t + 1))


def monomial_basis(d: int) -> list[tuple[int, int]]:
    """Exponent pairs (i, j) with i + j <= d, ordered by total degree then by j.

    Degree 1 gives [(0,0), (1,0), (0,1)].
    """
    if d < 0:
        raise ValueError(f"degree must be >= 0, got {d}")
    return list(_basis(d))


def derivative_orders(m: int) -> list[tuple[int, int]]:
    return [(t - b, b) for t in range(m) for b in range(t + 1)]


def hasse_row(point: tuple[int, int], order: tuple[int, int], d: int, field: PrimeField) -> list[int]:
    """Hasse derivative of every basis monomial at ``point``, reduced mod p."""
    p = field.p
    x, y = point[0] % p, point[1] % p
    a, b = order
    row = []
    for i, j in _basis(d):
        if i < a or j < b:
            row.append(0)
        else:
            row.append(binom(i, a) * binom(j, b) * pow(x, i - a, p) * pow(y, j - b, p) % p)
    return row


def _power_table(values: np.ndarray, d: int, p: int) -> np.ndarray:
    out = np.ones((len(values), d + 1), dtype=np.int64)
    for e in range(1, d + 1):
        out[:, e] = out[:, e - 1] * values % p
    return out


def build_conditions_matrix(spec: SystemSpec, config: PointConfig, field: PrimeField) -> np.ndarray:
    """Stack the Hasse rows for every point and every order a + b < m.

    Rows are grouped by point, then by derivative order; columns follow
    :func:`monomial_basis`.  Vectorized over points; agrees entrywise with
    :func:`hasse_row`.
    """
    d, m, n = spec.d, spec.m, spec.n
    p = field.p
    if d < 0:
        raise ValueError(f"degree must be >= 0, got {d}")
    if p <= d:
        raise ValueError(f"prime {p} must exceed the degree {d}")
    pts = np.asarray(config.points, dtype=np.int64).reshape(-1, 2) % p
    if len(pts) != n:
        raise ValueError(f"expected {n} points, got {len(pts)}")
    basis = _basis(d)
    orders = derivative_orders(m)
    mat = np.zeros((n * len(orders), len(basis)), dtype=np.int64)
    if n == 0 or not orders:
        return mat
    xp = _power_table(pts[:, 0], d, p)
    yp = _power_table(pts[:, 1], d, p)
    for c, (i, j) in enumerate(basis):
        for o, (a, b) in enumerate(orders):
            if i < a or j < b:
                continue
            coef = binom(i, a) * binom(j, b) % p
            col = xp[:, i - a] * yp[:, j - b] % p
            mat[o::len(orders), c] = col * coef % p
    return mat


def rank_mod_p(matrix, field: PrimeField | int) -> int:
    """Exact rank over F_p by row elimination with modular inverses."""
    p = field.p if isinstance(field, PrimeField) else int(field)
    a = np.array(matrix, dtype=np.int64) % p
    if a.ndim != 2 or a.size == 0:
        return 0
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r, c:] = a[r, c:] * inv % p
        below = a[r + 1:, c]
        hit = np.flatnonzero(below)
        if hit.size:
            idx = hit + r + 1
            a[idx, c:] = (a[idx, c:] - a[idx, c:c + 1] * a[r, c:]) % p
        r += 1
    return r


def trial_points(n: int, prime: int, seed: int, trial_index: int) -> PointConfig:
    """Reproducible random affine points for one trial."""
    rng = np.random.default_rng([seed, trial_index])
    pts = rng.integers(1, prime, size=(n, 2), dtype=np.int64)
    return PointConfig(points=pts, seed=seed, trial_index=trial_index)


def trial_rank(spec: SystemSpec, prime: int, seed: int, trial_index: int) -> int:
    fld = PrimeField(prime)
    pts = trial_points(spec.n, prime, seed, trial_index)
    return rank_mod_p(build_conditions_matrix(spec, pts, fld), fld)


def oracle_dim(spec: SystemSpec, cfg: OracleConfig = OracleConfig()) -> OracleResult:
    """Minimum of cols - rank over up to ``cfg.trials`` random point sets.

    Stops at the first trial that reaches the expected dimension, since no
    later trial can go lower.
    """
    if cfg.trials < 1:
        raise ValueError("oracle needs at least one trial")
    if spec.d < 0:
        raise ValueError(f"degree must be >= 0, got {spec.d}")
    expected = expected_vec_dim(spec)
    cols = spec.cols
    best = cols
    ranks: list[int] = []
    witness = None
    for t in range(cfg.trials):
        rk = trial_rank(spec, cfg.prime, cfg.seed, t)
        ranks.append(rk)
        best = min(best, cols - rk)
        if best == expected:
            witness = t
            break
    log.debug("oracle %s p=%d ranks=%s vec=%d expected=%d", spec, cfg.prime, ranks, best, expected)
    return OracleResult(
        spec=spec,
        vec_dim=best,
        certified_nonspecial=witness is not None,
        trials_run=len(ranks),
        prime=cfg.prime,
        seed=cfg.seed,
        witness_trial=witness,
        ranks=ranks,
    )


@dataclass(frozen=True)
class Speciality:
    """Outcome of :func:`probe_speciality`.

    kind is one of NonSpecialCertified, ProbablySpecial, Unknown; gap is
    set only for ProbablySpecial.
    """

    kind: str
    vec_dim: int | None
    expected: int
    gap: int | None = None
    witness: OracleResult | None = None
    primes: tuple[int, ...] = ()

    def __str__(self) -> str:
        if self.kind == "ProbablySpecial":
            return f"ProbablySpecial(gap={self.gap})"
        return self.kind


NON_SPECIAL = "NonSpecialCertified"
PROBABLY_SPECIAL = "ProbablySpecial"
UNKNOWN = "Unknown"


def probe_speciality(spec: SystemSpec, cfg: OracleConfig = OracleConfig()) -> Speciality:
    """Witness non-speciality, or report a gap that two primes agree on."""
    expected = expected_vec_dim(spec)
    if cfg.trials < 1:
        return Speciality(UNKNOWN, None, expected)
    first = oracle_dim(spec, cfg)
    if first.certified_nonspecial:
        return Speciality(NON_SPECIAL, first.vec_dim, expected, witness=first, primes=(cfg.prime,))
    other = cfg.second_prime if cfg.second_prime != cfg.prime else DEFAULT_PRIME
    second = oracle_dim(spec, OracleConfig(prime=other, trials=cfg.trials, seed=cfg.seed))
    if second.certified_nonspecial:
        return Speciality(NON_SPECIAL, second.vec_dim, expected, witness=second, primes=(other,))
    primes = (cfg.prime, other)
    all_vec = {spec.cols - r for r in first.ranks + second.ranks}
    if len(all_vec) == 1 and first.vec_dim > expected:
        return Speciality(PROBABLY_SPECIAL, first.vec_dim, expected, gap=first.vec_dim - expected, primes=primes)
    return Speciality(UNKNOWN, min(first.vec_dim, second.vec_dim), expected, primes=primes)
