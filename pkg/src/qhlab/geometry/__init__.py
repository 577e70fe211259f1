"""Domain oracles: membership, boundary distance and point sampling."""

from .domains import (
    KINDS,
    DomainOracle,
    DomainSpec,
    contains,
    delta,
    make_domain,
)
from .sampling import sample_pairs, sample_points

__all__ = [
    "KINDS",
    "DomainOracle",
    "DomainSpec",
    "contains",
    "delta",
    "make_domain",
    "sample_pairs",
    "sample_points",
]
