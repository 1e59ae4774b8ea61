"""Random m-ary search trees: insertion, node typing and exact profiles."""

import logging
from bisect import bisect_left
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass

logger = logging.getLogger(__name__)

# Node type codes run 1..2m-1:
#   1..m-1    m-1 keys, that many empty child slots, at least one child
#   m         m-1 keys, no children (full leaf)
#   m+1..2m-2 leaf holding code-m keys
#   2m-1      m-1 keys and all m children (full node, no gaps)
NodeTypeCode = int


class InvalidParameterError(ValueError):
    """Raised when a branching factor or size parameter is out of range."""


class DuplicateKeyError(ValueError):
    """Raised when a rank is inserted twice into the same tree."""

    def __init__(self, rank: int) -> None:
        super().__init__(f"Duplicate key: rank {rank} is already in the tree")
        self.rank = rank


class EmptyTreeError(ValueError):
    """Raised when a profile is requested for a tree with no keys."""

    def __init__(self) -> None:
        super().__init__("Profile is undefined for an empty tree (n = 0)")


def check_branching(m: int) -> int:
    """Validate a branching factor and return it."""
    if m < 2:
        raise InvalidParameterError(
            f"Branching factor m must be >= 2, got {m}"
        )
    return m


@dataclass(slots=True, eq=False)
class Node:
    """A tree node: up to m-1 ascending ranks and m child slots."""

    keys: list[int]
    children: list["Node | None"]

    @property
    def outdegree(self) -> int:
        return sum(1 for child in self.children if child is not None)

    @property
    def empty_slots(self) -> int:
        return sum(1 for child in self.children if child is None)


@dataclass(eq=False)
class MaryTree:
    """An m-ary search tree grown by successive insertions."""

    m: int
    n: int = 0
    root: Node | None = None

    def __post_init__(self) -> None:
        check_branching(self.m)

    def __len__(self) -> int:
        return self.n

    def __contains__(self, rank: object) -> bool:
        return isinstance(rank, int) and search(self, rank)

    def __iter__(self) -> Iterator[int]:
        return in_order(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MaryTree):
            return NotImplemented
        return (
            self.m == other.m
            and self.n == other.n
            and self.shape() == other.shape()
        )

    def nodes(self) -> Iterator[Node]:
        """Yield nodes in preorder (node, then children left to right)."""
        if self.root is None:
            return
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            for child in reversed(node.children):
                if child is not None:
                    stack.append(child)

    def shape(self) -> list[tuple[tuple[int, ...], tuple[bool, ...]]]:
        """Preorder fingerprint: each node's keys and child-slot occupancy."""
        return [
            (
                tuple(node.keys),
                tuple(child is not None for child in node.children),
            )
            for node in self.nodes()
        ]


@dataclass(frozen=True)
class GapProfile:
    """Gap counts by color; counts[i - 1] holds color i (1..2m-2)."""

    m: int
    counts: tuple[int, ...]

    def color(self, i: int) -> int:
        return self.counts[i - 1]

    @property
    def total(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class DegreeProfile:
    """Node counts by outdegree; counts[k] holds nodes with k children."""

    m: int
    counts: tuple[int, ...]

    @property
    def nodes(self) -> int:
        return sum(self.counts)

    @property
    def leaves(self) -> int:
        return self.counts[0]

    @property
    def protected(self) -> int:
        """1-protected nodes, i.e. every non-leaf."""
        return self.nodes - self.leaves

    @property
    def full(self) -> int:
        return self.counts[self.m]


def new_tree(m: int) -> MaryTree:
    """Return an empty tree with branching factor m."""
    return MaryTree(m=check_branching(m))


def new_node(m: int, keys: Iterable[int]) -> Node:
    return Node(keys=list(keys), children=[None] * m)


def insert(tree: MaryTree, rank: int) -> MaryTree:
    """Insert one rank in place and return the tree.

    A node fills up to m-1 keys before it acquires children; a rank
    reaching a full node descends into the subtree of its interval,
    creating a single-key leaf when that slot is empty.

    Raises:
        DuplicateKeyError: If the rank is already present.
    """
    m = tree.m
    if tree.root is None:
        tree.root = new_node(m, [rank])
        tree.n = 1
        return tree

    node = tree.root
    while True:
        keys = node.keys
        pos = bisect_left(keys, rank)
        if pos < len(keys) and keys[pos] == rank:
            raise DuplicateKeyError(rank)
        if len(keys) < m - 1:
            keys.insert(pos, rank)
            break
        child = node.children[pos]
        if child is None:
            node.children[pos] = new_node(m, [rank])
            break
        node = child

    tree.n += 1
    return tree


def build_from_permutation(m: int, perm: Iterable[int]) -> MaryTree:
    """Fold insert over the ranks of perm, in order."""
    tree = new_tree(m)
    for rank in perm:
        insert(tree, rank)
    logger.debug("Built %d-ary tree on %d keys", m, tree.n)
    return tree


def search(tree: MaryTree, rank: int) -> bool:
    """Return True if rank is stored in the tree."""
    node = tree.root
    while node is not None:
        keys = node.keys
        pos = bisect_left(keys, rank)
        if pos < len(keys) and keys[pos] == rank:
            return True
        if len(keys) < tree.m - 1:
            return False
        node = node.children[pos]
    return False


def in_order(tree: MaryTree) -> Iterator[int]:
    """Yield all ranks in ascending order."""
    if tree.root is None:
        return
    stack: list[Node | int] = [tree.root]
    while stack:
        item = stack.pop()
        if isinstance(item, int):
            yield item
            continue
        keys, children = item.keys, item.children
        last = children[len(keys)] if len(keys) < len(children) else None
        if last is not None:
            stack.append(last)
        for i in range(len(keys) - 1, -1, -1):
            stack.append(keys[i])
            if children[i] is not None:
                stack.append(children[i])  # type: ignore[arg-type]


def classify_node(node: Node, m: int) -> NodeTypeCode:
    """Return the type code (1..2m-1) of a well-formed node."""
    held = len(node.keys)
    if held < m - 1:
        return m + held
    empty = node.empty_slots
    if empty == m:
        return m
    if empty == 0:
        return 2 * m - 1
    return empty


def gap_color(code: NodeTypeCode, m: int) -> tuple[int, int] | None:
    """Return (color, number of gaps) for a node type, None for full nodes."""
    if code == 2 * m - 1:
        return None
    if code <= m:
        return code, code
    return code, code - m + 1


def node_type_counts(tree: MaryTree) -> dict[NodeTypeCode, int]:
    """Count nodes per type code, keyed in ascending code order."""
    counts = Counter(classify_node(node, tree.m) for node in tree.nodes())
    return dict(sorted(counts.items()))


def gap_profile(tree: MaryTree) -> GapProfile:
    """Count the insertion gaps of each color.

    Raises:
        EmptyTreeError: If the tree holds no keys.
    """
    if tree.n == 0:
        raise EmptyTreeError()
    m = tree.m
    counts = [0] * (2 * m - 2)
    for node in tree.nodes():
        colored = gap_color(classify_node(node, m), m)
        if colored is not None:
            color, gaps = colored
            counts[color - 1] += gaps
    return GapProfile(m=m, counts=tuple(counts))


def degree_profile(tree: MaryTree) -> DegreeProfile:
    """Count nodes by outdegree.

    Raises:
        EmptyTreeError: If the tree holds no keys.
    """
    if tree.n == 0:
        raise EmptyTreeError()
    counts = [0] * (tree.m + 1)
    for node in tree.nodes():
        counts[node.outdegree] += 1
    return DegreeProfile(m=tree.m, counts=tuple(counts))
