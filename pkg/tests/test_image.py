"""Tests for the compact CMST tree image."""

import pytest

from mstree.codec.image import (
    BadMagicError,
    CompactFormatError,
    DanglingOffsetError,
    InvalidNodeTypeError,
    KeyOverflowError,
    OffsetOverflowError,
    TruncatedImageError,
    UnsupportedVersionError,
    decode,
    encode,
    lookup,
    read_image,
)
from mstree.codec.size_model import size_breakdown, size_params
from mstree.core.tree import (
    EmptyTreeError,
    build_from_permutation,
    degree_profile,
    new_tree,
    search,
)
from mstree.utils.rng import derive_seed, random_permutation


@pytest.fixture
def figure_one_image(figure_one_tree):
    return encode(figure_one_tree, size_params(4))


class TestEncode:
    def test_figure_one_layout(self, figure_one_image):
        data = figure_one_image.data
        assert data[:4] == b"CMST"
        assert data[4] == 1
        assert int.from_bytes(data[5:7], "little") == 4
        assert (data[7], data[8]) == (4, 4)
        assert data[9:12] == b"\x00\x00\x00"
        assert int.from_bytes(data[12:20], "little") == 16
        assert figure_one_image.root_offset == 24
        assert len(data) == 120
        assert figure_one_image.payload_size == 96

    def test_figure_one_records(self, figure_one_image):
        root = figure_one_image.record(24)
        assert root.code == 2
        assert root.bitmap == 0b1010
        assert root.keys == (11, 12, 16)
        assert root.links == (46, 107)
        assert root.slots == (0, 2)
        assert root.link_for_slot(1) is None
        assert root.link_for_slot(2) == 107

        full = figure_one_image.record(46)
        assert full.code == 7
        assert full.bitmap == 0b1111
        assert full.links == (75, 84, 97, 102)

        assert figure_one_image.record(75).keys == (1, 2)
        assert figure_one_image.record(97).code == 5

    def test_empty_tree(self):
        with pytest.raises(EmptyTreeError):
            encode(new_tree(3), size_params(3))

    def test_key_overflow(self):
        tree = build_from_permutation(3, [1, 256])
        with pytest.raises(KeyOverflowError):
            encode(tree, size_params(3, k=1))

    def test_offset_overflow(self):
        tree = build_from_permutation(2, random_permutation(200, 1))
        with pytest.raises(OffsetOverflowError):
            encode(tree, size_params(2, p=1))

    def test_params_must_match_tree(self, figure_one_tree):
        with pytest.raises(ValueError):
            encode(figure_one_tree, size_params(5))

    def test_sorted_input(self):
        tree = build_from_permutation(5, range(1, 101))
        params = size_params(5)
        image = encode(tree, params)
        assert degree_profile(tree).nodes == 25
        assert image.payload_size == size_breakdown(tree, params).total
        assert decode(image) == tree
        assert all(lookup(image, r) for r in range(1, 101))


class TestRoundTrip:
    @pytest.mark.parametrize("m", [2, 4, 10, 27])
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 1000])
    def test_random_trees(self, m, n):
        # 24 combinations x 9 seeds: 216 trees.
        for index in range(9):
            seed = derive_seed(m * 10_000 + n, index)
            ranks = random_permutation(2 * n, seed)[:n]
            tree = build_from_permutation(m, ranks)
            params = size_params(m)
            image = encode(tree, params)

            assert image.payload_size == size_breakdown(tree, params).total
            assert decode(read_image(image.data)) == tree
            present = set(ranks)
            assert all(lookup(image, r) for r in ranks)
            absent = [r for r in range(1, 2 * n + 2) if r not in present]
            assert all(not lookup(image, r) for r in absent)
            assert all(search(tree, r) for r in ranks)

    def test_single_key(self):
        tree = build_from_permutation(2, [7])
        image = encode(tree, size_params(2))
        assert image.payload_size == 1 + 4
        assert decode(image) == tree
        assert lookup(image, 7)
        assert not lookup(image, 6)


class TestMalformedImages:
    def _mutate(self, image, offset, value):
        data = bytearray(image.data)
        data[offset] = value
        return bytes(data)

    def test_short_data(self):
        with pytest.raises(TruncatedImageError):
            read_image(b"CMST")

    def test_bad_magic(self, figure_one_image):
        with pytest.raises(BadMagicError):
            read_image(self._mutate(figure_one_image, 0, ord("X")))

    def test_unknown_version(self, figure_one_image):
        with pytest.raises(UnsupportedVersionError):
            read_image(self._mutate(figure_one_image, 4, 2))

    def test_reserved_bytes(self, figure_one_image):
        with pytest.raises(CompactFormatError):
            read_image(self._mutate(figure_one_image, 10, 1))

    def test_dangling_root(self, figure_one_image):
        with pytest.raises(DanglingOffsetError):
            read_image(self._mutate(figure_one_image, 21, 0x10))

    def test_truncated_records(self, figure_one_image):
        image = read_image(figure_one_image.data[:-1])
        with pytest.raises(TruncatedImageError):
            decode(image)

    def test_dangling_child_link(self, figure_one_image):
        image = read_image(self._mutate(figure_one_image, 59, 0xC8))
        with pytest.raises(DanglingOffsetError):
            decode(image)
        with pytest.raises(DanglingOffsetError):
            lookup(image, 1)
        assert lookup(image, 12)

    def test_trailing_bytes(self, figure_one_image):
        image = read_image(figure_one_image.data + b"\x00")
        with pytest.raises(CompactFormatError):
            decode(image)

    def test_invalid_node_type(self, figure_one_image):
        image = read_image(self._mutate(figure_one_image, 24, 0))
        with pytest.raises(InvalidNodeTypeError):
            decode(image)

    def test_key_count_mismatch(self, figure_one_image):
        image = read_image(self._mutate(figure_one_image, 12, 17))
        with pytest.raises(CompactFormatError):
            decode(image)

    def test_bitmap_disagrees_with_type(self, figure_one_image):
        image = read_image(self._mutate(figure_one_image, 25, 0b1110))
        with pytest.raises(CompactFormatError):
            image.record(24)

    def test_errors_are_value_errors(self):
        assert issubclass(TruncatedImageError, CompactFormatError)
        assert issubclass(CompactFormatError, ValueError)
