"""Dimensions of homogeneous linear systems of plane curves L_d(m^n).

Exact rank over prime fields for the generic dimension, plus recursive
non-speciality certificates for composite point counts n = n1*n2.
"""

from .certify import (
    Certificate,
    CertificationFailed,
    Certifier,
    CertPolicy,
    Family,
    Fixed,
    Peel,
    certify,
    factor_pairs,
    preset_family,
    verify_certificate,
)
from .dimensions import (
    CaseLabel,
    SystemSpec,
    binom,
    classify_case,
    conditions_count,
    dim_L0,
    expected_proj_dim,
    expected_vec_dim,
    image_intersection,
    kernel_sum,
    select_k,
    virtual_dim,
)
from .oracle import OracleConfig, PrimeField, oracle_dim, probe_speciality
from .store import CacheEntry, ResultStore

__version__ = "0.1.0"
