"""Compact CMST tree images: encode, validate, decode and direct lookup.

Layout (all integers little-endian):

    "CMST" | version u8 | m u16 | k u8 | p u8 | 3 zero bytes | n u64
    | root offset (p bytes) | node records in preorder

A record opens with its type code t (descriptor_bytes wide):

    1..m-1   bitmap (bitmap_bytes), m-1 keys, m-t links in slot order
    m        m-1 keys
    m+1..2m-2  t-m keys
    2m-1     m-1 keys, m links

Keys are k bytes wide, links are p-byte absolute file offsets. The
bitmap stores child slot j (1..m) as bit 2^(m-j).
"""

import logging
import struct
from bisect import bisect_left
from dataclasses import dataclass

from mstree.codec.size_model import SizeParams, size_breakdown, size_params
from mstree.core.tree import (
    EmptyTreeError,
    MaryTree,
    Node,
    classify_node,
    in_order,
    new_node,
)

logger = logging.getLogger(__name__)

MAGIC = b"CMST"
VERSION = 1
_HEADER = struct.Struct("<4sBHBB3xQ")


class KeyOverflowError(ValueError):
    """Raised when a rank does not fit in k bytes."""


class OffsetOverflowError(ValueError):
    """Raised when a record offset does not fit in p bytes."""


class CompactFormatError(ValueError):
    """Raised when an image is structurally invalid."""


class BadMagicError(CompactFormatError):
    """Raised when an image does not start with the CMST magic."""


class UnsupportedVersionError(CompactFormatError):
    """Raised for an image version this reader does not know."""


class TruncatedImageError(CompactFormatError):
    """Raised when a field runs past the end of the image."""


class DanglingOffsetError(CompactFormatError):
    """Raised when a link points outside the record area or backwards."""


class InvalidNodeTypeError(CompactFormatError):
    """Raised when a descriptor is not a type code in 1..2m-1."""


@dataclass(frozen=True)
class NodeRecord:
    """One decoded record, without its subtrees."""

    offset: int
    end: int
    m: int
    code: int
    bitmap: int
    keys: tuple[int, ...]
    links: tuple[int, ...]

    @property
    def slots(self) -> tuple[int, ...]:
        """Zero-based child slots that hold a subtree."""
        return tuple(
            j for j in range(self.m) if self.bitmap >> (self.m - 1 - j) & 1
        )

    def link_for_slot(self, slot: int) -> int | None:
        """Offset of the child in zero-based slot, None if the slot is empty."""
        shift = self.m - 1 - slot
        if not self.bitmap >> shift & 1:
            return None
        return self.links[(self.bitmap >> (shift + 1)).bit_count()]


class CompactImage:
    """A validated CMST byte image."""

    def __init__(self, data: bytes) -> None:
        if len(data) < _HEADER.size:
            raise TruncatedImageError(
                f"Image of {len(data)} bytes is shorter than its header"
            )
        magic, version, m, k, p, n = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise BadMagicError(f"Bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise UnsupportedVersionError(
                f"Unsupported CMST version {version}"
            )
        if m < 2 or k < 1 or p < 1:
            raise CompactFormatError(
                f"Invalid header parameters m={m}, k={k}, p={p}"
            )
        if data[9:12] != b"\x00\x00\x00":
            raise CompactFormatError("Reserved header bytes are not zero")
        self.data = bytes(data)
        self.m, self.k, self.p, self.n = m, k, p, n
        self.params = size_params(m, k, p)
        self.header_size = _HEADER.size + p
        self.root_offset = self._uint(_HEADER.size, p)
        if n < 1:
            raise CompactFormatError("Image holds no keys")
        self._check_link(self.root_offset, self.header_size - 1)

    @property
    def payload_size(self) -> int:
        return len(self.data) - self.header_size

    def _uint(self, offset: int, width: int) -> int:
        end = offset + width
        if end > len(self.data):
            raise TruncatedImageError(
                f"Field at {offset} needs {width} bytes; image ends at "
                f"{len(self.data)}"
            )
        return int.from_bytes(self.data[offset:end], "little")

    def _check_link(self, target: int, parent: int) -> None:
        if target <= parent or target < self.header_size:
            raise DanglingOffsetError(
                f"Link to {target} from record at {parent} is not forward"
            )
        if target >= len(self.data):
            raise DanglingOffsetError(
                f"Link to {target} beyond image end {len(self.data)}"
            )

    def record(self, offset: int) -> NodeRecord:
        """Parse the record at offset.

        Raises:
            CompactFormatError: (or a subclass) on any malformed field.
        """
        m, k, p = self.m, self.k, self.p
        params = self.params
        cursor = offset
        code = self._uint(cursor, params.descriptor_bytes)
        cursor += params.descriptor_bytes
        if not 1 <= code <= 2 * m - 1:
            raise InvalidNodeTypeError(
                f"Descriptor {code} at {offset} is outside 1..{2 * m - 1}"
            )

        bitmap = 0
        if code < m:
            bitmap = self._uint(cursor, params.bitmap_bytes)
            cursor += params.bitmap_bytes
            if bitmap >> m:
                raise CompactFormatError(
                    f"Bitmap {bitmap} at {offset} sets bits beyond m={m}"
                )
            if bitmap.bit_count() != m - code:
                raise CompactFormatError(
                    f"Type {code} at {offset} needs {m - code} children, "
                    f"bitmap has {bitmap.bit_count()}"
                )
        elif code == 2 * m - 1:
            bitmap = (1 << m) - 1

        held = code - m if m < code < 2 * m - 1 else m - 1
        keys = []
        for _ in range(held):
            keys.append(self._uint(cursor, k))
            cursor += k
        if any(a >= b for a, b in zip(keys, keys[1:])):
            raise CompactFormatError(f"Keys at {offset} are not ascending")

        links = []
        for _ in range(bitmap.bit_count()):
            target = self._uint(cursor, p)
            cursor += p
            self._check_link(target, offset)
            links.append(target)
        return NodeRecord(
            offset=offset,
            end=cursor,
            m=m,
            code=code,
            bitmap=bitmap,
            keys=tuple(keys),
            links=tuple(links),
        )


def _put(buffer: bytearray, value: int, width: int) -> None:
    buffer += value.to_bytes(width, "little")


def bitmap_value(node: Node, m: int) -> int:
    """Child-presence bitmap: slot j (1..m) contributes 2^(m-j)."""
    return sum(
        1 << (m - 1 - j)
        for j, child in enumerate(node.children)
        if child is not None
    )


def encode(tree: MaryTree, params: SizeParams) -> CompactImage:
    """Serialize a non-empty tree into a CMST image.

    Raises:
        EmptyTreeError: If the tree holds no keys.
        KeyOverflowError: If a rank does not fit in k bytes.
        OffsetOverflowError: If a record offset does not fit in p bytes.
    """
    if tree.n == 0 or tree.root is None:
        raise EmptyTreeError()
    m, k, p = tree.m, params.k, params.p
    if params.m != m:
        raise ValueError(f"Size parameters are for m={params.m}, tree has m={m}")
    if m > 0xFFFF or k > 0xFF or p > 0xFF:
        raise ValueError(f"m={m}, k={k}, p={p} do not fit the CMST header")
    key_limit = 1 << (8 * k)
    link_limit = 1 << (8 * p)
    desc = params.descriptor_bytes

    nodes = list(tree.nodes())
    codes = [classify_node(node, m) for node in nodes]
    offsets: dict[int, int] = {}
    cursor = _HEADER.size + p
    for node, code in zip(nodes, codes, strict=True):
        offsets[id(node)] = cursor
        cursor += desc + len(node.keys) * k
        if code < m:
            cursor += params.bitmap_bytes + (m - code) * p
        elif code == 2 * m - 1:
            cursor += m * p
    if cursor - 1 >= link_limit:
        raise OffsetOverflowError(
            f"Image of {cursor} bytes needs links wider than p={p}"
        )

    buffer = bytearray(_HEADER.pack(MAGIC, VERSION, m, k, p, tree.n))
    _put(buffer, offsets[id(tree.root)], p)
    for node, code in zip(nodes, codes, strict=True):
        _put(buffer, code, desc)
        if code < m:
            _put(buffer, bitmap_value(node, m), params.bitmap_bytes)
        for rank in node.keys:
            if not 0 <= rank < key_limit:
                raise KeyOverflowError(
                    f"Rank {rank} does not fit in k={k} bytes"
                )
            _put(buffer, rank, k)
        for child in node.children:
            if child is not None:
                _put(buffer, offsets[id(child)], p)

    image = CompactImage(bytes(buffer))
    expected = size_breakdown(tree, params).total
    if image.payload_size != expected:
        raise CompactFormatError(
            f"Payload {image.payload_size} bytes, size model says {expected}"
        )
    logger.debug(
        "Encoded %d keys in %d nodes: %d payload bytes",
        tree.n, len(nodes), image.payload_size,
    )
    return image


def decode(image: CompactImage) -> MaryTree:
    """Rebuild the tree stored in an image.

    Raises:
        CompactFormatError: (or a subclass) if records are malformed,
            overlap, leave trailing bytes, or disagree with the header.
    """
    m = image.m
    tree = MaryTree(m=m)
    root_record = image.record(image.root_offset)
    tree.root = new_node(m, root_record.keys)
    stack = [(root_record, tree.root)]
    expected_next = image.header_size
    keys = 0
    # Preorder decode: each record must start where the previous ended.
    while stack:
        record, node = stack.pop()
        if record.offset != expected_next:
            raise CompactFormatError(
                f"Record at {record.offset} does not follow the record "
                f"ending at {expected_next}"
            )
        expected_next = record.end
        keys += len(record.keys)
        children = []
        for slot, link in zip(record.slots, record.links, strict=True):
            child_record = image.record(link)
            child = new_node(m, child_record.keys)
            node.children[slot] = child
            children.append((child_record, child))
        stack.extend(reversed(children))

    if expected_next != len(image.data):
        raise CompactFormatError(
            f"{len(image.data) - expected_next} trailing bytes after records"
        )
    if keys != image.n:
        raise CompactFormatError(
            f"Header promises {image.n} keys, records hold {keys}"
        )
    tree.n = keys
    ranks = list(in_order(tree))
    if any(a >= b for a, b in zip(ranks, ranks[1:])):
        raise CompactFormatError("Decoded keys violate search-tree order")
    return tree


def lookup(image: CompactImage, rank: int) -> bool:
    """Search the image directly, following one record per level."""
    m = image.m
    offset = image.root_offset
    while True:
        record = image.record(offset)
        pos = bisect_left(record.keys, rank)
        if pos < len(record.keys) and record.keys[pos] == rank:
            return True
        if m <= record.code < 2 * m - 1:
            return False
        # The child's link index is the number of set bits left of pos.
        link = record.link_for_slot(pos)
        if link is None:
            return False
        offset = link


def read_image(data: bytes) -> CompactImage:
    """Validate raw bytes as a CMST image."""
    return CompactImage(data)
