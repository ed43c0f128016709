"""Integer dimension calculus for homogeneous linear systems L_d(m^n).

Everything here is exact integer arithmetic. Projective dimensions carry the
``proj`` suffix; vector-space dimensions (projective + 1, floored at 0) carry
``vec``.

The fibered-product helpers (:func:`kernel_sum`, :func:`image_intersection`,
:func:`dim_L0`) evaluate the dimension of the limit system obtained by
degenerating ``n1*n2`` points into ``n1`` clusters of ``n2`` points, twisted
by an integer ``k``.  They assume the four restricted systems are
non-special, so every ingredient is an expected dimension.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import comb, isqrt


@dataclass(frozen=True, order=True)
class SystemSpec:
    """The homogeneous system L_d(m^n): degree d, multiplicity m, n points."""

    d: int
    m: int
    n: int

    def __post_init__(self) -> None:
        if self.m < 0 or self.n < 0:
            raise ValueError(f"multiplicity and point count must be >= 0, got m={self.m}, n={self.n}")

    def __str__(self) -> str:
        return f"L_{self.d}({self.m}^{self.n})"

    @property
    def cols(self) -> int:
        """Number of monomials of degree <= d."""
        return binom(self.d + 2, 2) if self.d >= 0 else 0

    @property
    def rows(self) -> int:
        return conditions_count(self.m, self.n)

    def as_dict(self) -> dict[str, int]:
        return {"d": self.d, "m": self.m, "n": self.n}


def binom(a: int, b: int) -> int:
    if a < 0 or b < 0:
        raise ValueError("binom takes non-negative arguments")
    return comb(a, b)


def _tri(x: int) -> int:
    # x(x+1)/2, always an integer
    return x * (x + 1) // 2


def _full(d: int) -> int:
    # d(d+3)/2 + 1 == C(d+2, 2)
    return d * (d + 3) // 2 + 1


def conditions_count(m: int, n: int) -> int:
    """Linear conditions imposed by n points of multiplicity m."""
    if m < 0 or n < 0:
        raise ValueError("m and n must be non-negative")
    return n * _tri(m)


def _spec(spec_or_d, m=None, n=None) -> SystemSpec:
    if isinstance(spec_or_d, SystemSpec):
        return spec_or_d
    return SystemSpec(spec_or_d, m, n)


def virtual_dim(spec: SystemSpec | int, m: int | None = None, n: int | None = None) -> int:
    """Projective virtual dimension ``d(d+3)/2 - n*m(m+1)/2``."""
    s = _spec(spec, m, n)
    if s.d < 0:
        raise ValueError(f"virtual dimension is undefined for negative degree d={s.d}")
    return s.d * (s.d + 3) // 2 - conditions_count(s.m, s.n)


def expected_proj_dim(spec: SystemSpec | int, m: int | None = None, n: int | None = None) -> int:
    return max(-1, virtual_dim(spec, m, n))


def expected_vec_dim(spec: SystemSpec | int, m: int | None = None, n: int | None = None) -> int:
    """Expected vector-space dimension, total in d.

    Negative degree gives 0 (the empty system); m = 0 or n = 0 gives the
    full space C(d+2, 2).
    """
    s = _spec(spec, m, n)
    if s.d < 0:
        return 0
    if s.m == 0 or s.n == 0:
        return binom(s.d + 2, 2)
    return max(_full(s.d) - conditions_count(s.m, s.n), 0)


@dataclass(frozen=True)
class KSelection:
    candidates: tuple[int, ...]
    m: int
    n2: int

    def __iter__(self):
        return iter(self.candidates)

    def __contains__(self, k: object) -> bool:
        return k in self.candidates


def _k_lower_ok(k: int, m: int, n2: int) -> bool:
    # k(k+3)/2 + 1 - n2*m(m+1)/2 >= 0, i.e. L_k(m^n2) has non-negative virtual vec dim
    return _full(k) - n2 * _tri(m) >= 0


def _k_upper_ok(k: int, m: int, n2: int) -> bool:
    # (k-1)(k+2)/2 + 1 - n2*m(m+1)/2 <= 0
    return (k - 1) * (k + 2) // 2 + 1 - n2 * _tri(m) <= 0


def select_k(m: int, n2: int) -> KSelection:
    """All integers k in the closed bracket [k_l, k_u] with k_u = k_l + 1.

    The bracket endpoints are the positive roots of ``k^2 + 3k + 2 = N`` and
    ``k^2 + k = N`` with ``N = n2*m*(m+1)``; membership is decided with
    integer inequalities only.
    """
    if m < 1 or n2 < 1:
        raise ValueError(f"select_k needs m >= 1 and n2 >= 1, got m={m}, n2={n2}")
    big_n = n2 * m * (m + 1)
    # floor(k_u) = floor((sqrt(1 + 4N) - 1) / 2)
    hi = (isqrt(1 + 4 * big_n) - 1) // 2
    ks = tuple(k for k in (hi - 1, hi) if k >= 0 and _k_lower_ok(k, m, n2) and _k_upper_ok(k, m, n2))
    if not ks:
        raise AssertionError(f"empty k bracket for m={m}, n2={n2}")  # unreachable: k_u - k_l = 1
    return KSelection(ks, m, n2)


# --- fibered product ------------------------------------------------------


def _check_dk(d: int, k: int) -> None:
    if d < 0 or k < 0:
        raise ValueError(f"need d >= 0 and k >= 0, got d={d}, k={k}")


def kernel_sum(d: int, k: int, m: int, n1: int, n2: int) -> int:
    """dim ker(rho_Y) + dim ker(r_1, ..., r_n1) = dim L_d((k+1)^n1) + n1 dim L_{k-1}(m^n2)."""
    _check_dk(d, k)
    return expected_vec_dim(d, k + 1, n1) + n1 * expected_vec_dim(k - 1, m, n2)


def image_dims(d: int, k: int, m: int, n1: int, n2: int) -> tuple[int, int]:
    """Dimensions of the two restriction images onto the n1 exceptional lines."""
    im_y = expected_vec_dim(d, k, n1) - expected_vec_dim(d, k + 1, n1)
    im_p = n1 * (expected_vec_dim(k, m, n2) - expected_vec_dim(k - 1, m, n2))
    return im_y, im_p


def image_intersection(d: int, k: int, m: int, n1: int, n2: int) -> int:
    """Images meeting properly inside the n1*(k+1)-dimensional space of line sections."""
    _check_dk(d, k)
    im_y, im_p = image_dims(d, k, m, n1, n2)
    return max(im_y + im_p - n1 * (k + 1), 0)


def dim_L0(d: int, k: int, m: int, n1: int, n2: int) -> int:
    return kernel_sum(d, k, m, n1, n2) + image_intersection(d, k, m, n1, n2)


class CaseLabel(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    A = "A"
    NONE = "NONE"


@dataclass(frozen=True)
class CaseQuantities:
    """Virtual vector dimensions that drive the case analysis.

    big_y1: L_d((k+1)^n1), small_p0: L_{k-1}(m^n2), small_p: L_k(m^n2),
    big_y: L_d(k^n1), total: L_d(m^(n1 n2)).  Values are raw, not floored.
    """

    big_y1: int
    small_p0: int
    small_p: int
    big_y: int
    total: int

    @classmethod
    def of(cls, d: int, k: int, m: int, n1: int, n2: int) -> "CaseQuantities":
        c = n2 * _tri(m)
        return cls(
            big_y1=_full(d) - n1 * _tri(k + 1),
            small_p0=(k - 1) * (k + 2) // 2 + 1 - c,
            small_p=_full(k) - c,
            big_y=_full(d) - n1 * _tri(k),
            total=_full(d) - n1 * c,
        )


def classify_case(d: int, k: int, m: int, n1: int, n2: int) -> CaseLabel:
    """First of the conditions I..IV, then A, that holds; NONE otherwise."""
    _check_dk(d, k)
    q = CaseQuantities.of(d, k, m, n1, n2)
    if q.big_y1 >= 0 and q.small_p0 >= 0:
        return CaseLabel.I
    if q.big_y1 >= 0 and q.small_p0 <= 0 and q.small_p >= 0:
        return CaseLabel.II
    if q.big_y1 <= 0 and q.small_p0 >= 0 and q.big_y >= 0:
        return CaseLabel.III
    if q.big_y1 <= 0 and q.small_p0 <= 0 and q.total >= 0:
        return CaseLabel.IV
    if q.big_y1 <= 0 and q.small_p0 <= 0 and q.total <= 0:
        return CaseLabel.A
    return CaseLabel.NONE


# --- closed-form case tables ----------------------------------------------
#
# These restate the kernel and intersection dimensions case by case, without
# any max(., 0).  They are an independent route used by cross-checks.  A
# hypothesis "dim >= 0" is read as "vector dimension > 0" and "dim = 0" as
# "vector dimension = 0".


def kernel_sum_cases(d: int, k: int, m: int, n1: int, n2: int) -> list[tuple[str, int]]:
    """Closed forms for kernel_sum whose hypotheses hold at (d, k, m, n1, n2)."""
    q = CaseQuantities.of(d, k, m, n1, n2)
    y1_pos, p0_pos = q.big_y1 > 0, q.small_p0 > 0
    out = []
    if y1_pos and p0_pos:
        out.append(("1", q.total - n1 * (k + 1)))
    if y1_pos and not p0_pos:
        out.append(("2", _full(d) - n1 * _tri(k + 1)))
    if not y1_pos and p0_pos:
        out.append(("3", n1 * ((k - 1) * (k + 2) // 2 + 1 - n2 * _tri(m))))
    if not y1_pos and not p0_pos:
        out.append(("4", 0))
    return out


def _third_case_table(d: int, k: int, n1: int) -> int:
    return _full(d) - n1 * _tri(k)


def _third_case_proof_text(d: int, k: int, n1: int) -> int:
    # the sign as printed in the worked derivation, kept to show it disagrees
    return _full(d) + n1 * _tri(k)


def image_intersection_cases(
    d: int, k: int, m: int, n1: int, n2: int, third_case=_third_case_table
) -> list[tuple[str, int]]:
    """Closed forms for image_intersection whose hypotheses hold.

    ``third_case`` selects the expression used for the third case; the
    default is the tabulated ``d(d+3)/2 + 1 - n1 k(k+1)/2``.
    """
    q = CaseQuantities.of(d, k, m, n1, n2)
    y1_pos, p0_pos = q.big_y1 > 0, q.small_p0 > 0
    out = []
    if y1_pos and p0_pos:
        out.append(("1", n1 * (k + 1)))
    if y1_pos and q.small_p > 0 and not p0_pos:
        out.append(("2", n1 * (_full(k) - n2 * _tri(m))))
    if q.big_y > 0 and not y1_pos and p0_pos:
        out.append(("3", third_case(d, k, n1)))
    if not y1_pos and not p0_pos and q.total >= 0:
        out.append(("4", q.total))
    if not out:
        out.append(("otherwise", 0))
    return out
