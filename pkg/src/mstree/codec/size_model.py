"""Byte-size model of the compact node layout and its limiting ratios."""

import math
from dataclasses import dataclass

from mstree.core.asymptotics import limit_profile
from mstree.core.spectra import harmonic
from mstree.core.tree import (
    InvalidParameterError,
    MaryTree,
    degree_profile,
    gap_profile,
)

SUPPORTED_BITS_PER_BYTE = (8,)


class InconsistentProfileError(ValueError):
    """Raised when gap counts do not split into whole nodes."""


def _bytes_for_values(values: int, b: int) -> int:
    """Whole bytes for ceil(log2(values)) bits."""
    bits = (values - 1).bit_length()
    return max(1, -(-bits // b))


@dataclass(frozen=True)
class SizeParams:
    """Field widths for the compact layout.

    delta is the descriptor width sized for 2m-2 types; descriptor_bytes
    is what the codec writes, wide enough for type 2m-1 as well.
    bitmap_bytes holds the m child-presence bits.
    """

    m: int
    k: int
    p: int
    b: int
    delta: int
    bitmap_bytes: int
    descriptor_bytes: int

    @property
    def plain_node_bytes(self) -> int:
        return self.m * self.p + (self.m - 1) * self.k


@dataclass(frozen=True)
class SizeBreakdown:
    """Compact size split by node kind, in bytes."""

    full_nodes_bytes: int
    internal_bytes: int
    full_leaf_bytes: int
    partial_leaf_bytes: int

    @property
    def total(self) -> int:
        return (
            self.full_nodes_bytes
            + self.internal_bytes
            + self.full_leaf_bytes
            + self.partial_leaf_bytes
        )


def size_params(m: int, k: int = 4, p: int = 4, b: int = 8) -> SizeParams:
    """Validate widths and derive the descriptor and bitmap sizes."""
    if m < 2:
        raise InvalidParameterError(f"m must be >= 2, got {m}")
    if k < 1 or p < 1:
        raise InvalidParameterError(
            f"Key and link widths must be >= 1 byte, got k={k}, p={p}"
        )
    if b not in SUPPORTED_BITS_PER_BYTE:
        raise InvalidParameterError(f"Only b=8 bits per byte is supported, got {b}")
    # Descriptors hold codes 1..2m-2 (analytic model) or 1..2m-1 (codec).
    delta = _bytes_for_values(2 * m - 2, b)
    return SizeParams(
        m=m,
        k=k,
        p=p,
        b=b,
        delta=delta,
        bitmap_bytes=-(-m // b),
        descriptor_bytes=max(delta, _bytes_for_values(2 * m, b)),
    )


def plain_size(nodes: int, params: SizeParams) -> int:
    """Bytes used when every node carries m-1 key slots and m links."""
    if nodes < 0:
        raise InvalidParameterError(f"Node count must be >= 0, got {nodes}")
    return params.plain_node_bytes * nodes


def _whole(count: int, group: int, color: int) -> int:
    if count % group:
        raise InconsistentProfileError(
            f"{count} gaps of color {color} do not split into nodes of {group}"
        )
    return count // group


def compact_size_formula(
    gaps: tuple[int, ...], full_nodes: int, params: SizeParams,
) -> SizeBreakdown:
    """Compact size from a gap profile and the count of full nodes.

    gaps[i - 1] is the number of color-i gaps.

    Raises:
        InconsistentProfileError: If a color count is not a whole
            number of nodes, or the profile length is not 2m-2.
    """
    m, k, p = params.m, params.k, params.p
    if len(gaps) != 2 * m - 2:
        raise InconsistentProfileError(
            f"Expected {2 * m - 2} gap counts for m={m}, got {len(gaps)}"
        )
    desc = params.descriptor_bytes
    keys = (m - 1) * k

    internal = sum(
        (desc + params.bitmap_bytes + keys + (m - i) * p)
        * _whole(gaps[i - 1], i, i)
        for i in range(1, m)
    )
    full_leaves = (desc + keys) * _whole(gaps[m - 1], m, m)
    partial = sum(
        (desc + j * k) * _whole(gaps[m + j - 1], j + 1, m + j)
        for j in range(1, m - 1)
    )
    return SizeBreakdown(
        full_nodes_bytes=(desc + keys + m * p) * full_nodes,
        internal_bytes=internal,
        full_leaf_bytes=full_leaves,
        partial_leaf_bytes=partial,
    )


def size_breakdown(tree: MaryTree, params: SizeParams) -> SizeBreakdown:
    """compact_size_formula evaluated on a tree's exact profile."""
    return compact_size_formula(
        gap_profile(tree).counts, degree_profile(tree).full, params,
    )


def relative_limit_exact(
    m: int, k: int = 4, p: int = 4, b: int = 8,
) -> float:
    """Limit of compact over plain size, in closed form."""
    params = size_params(m, k, p, b)
    h = harmonic(m)
    d, big_d = params.delta, params.bitmap_bytes
    numerator = (
        2 * m * m * k * h
        + m * m * d
        - 2 * m * m * k
        + m * m * p
        + 2 * m * k * h
        + m * d
        + 2 * m * big_d
        + m * p
        - 2 * m * k
        - 2 * big_d
    )
    return numerator / (m * (m + 1) * params.plain_node_bytes)


def relative_limit_from_profile(
    m: int, k: int = 4, p: int = 4, b: int = 8,
) -> float:
    """The same limit summed term by term over the limiting fractions."""
    params = size_params(m, k, p, b)
    limits = limit_profile(m)
    v = limits.v
    d = params.delta
    keys = (m - 1) * k
    compact = (d + keys + m * p) * limits.full_fraction
    compact += sum(
        (d + params.bitmap_bytes + keys + (m - i) * p) * v[i - 1] / i
        for i in range(1, m)
    )
    compact += (d + keys) * v[m - 1] / m
    compact += sum((d + j * k) * v[m + j - 1] / (j + 1) for j in range(1, m - 1))
    return compact / (params.plain_node_bytes * limits.node_fraction)


def relative_limit_asymptotic(
    m: int, k: int = 4, p: int = 4, b: int = 8,
) -> float:
    """Large-m approximation (2k + b) ln m / ((k + p) m)."""
    if m < 2:
        raise InvalidParameterError(f"m must be >= 2, got {m}")
    return (2 * k + b) * math.log(m) / ((k + p) * m)
