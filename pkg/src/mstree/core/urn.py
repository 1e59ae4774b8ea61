"""The 2m-2 color gap urn and its step-by-step coupling with tree growth."""

import logging
from bisect import bisect_left, bisect_right, insort
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from mstree.core.tree import (
    EmptyTreeError,
    GapProfile,
    MaryTree,
    build_from_permutation,
    check_branching,
    classify_node,
    gap_color,
    gap_profile,
    in_order,
    insert,
)
from mstree.utils.rng import Xoshiro256StarStar, random_permutation

logger = logging.getLogger(__name__)


class TenabilityError(RuntimeError):
    """Raised when a draw would take a ball the urn does not hold."""


class GapIndexError(IndexError):
    """Raised when a gap index falls outside 0..n."""


@dataclass(frozen=True)
class ReplacementMatrix:
    """Row r is the ball-count change applied when color r is drawn."""

    m: int
    rows: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.rows)

    def row(self, color: int) -> tuple[int, ...]:
        return self.rows[color - 1]

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)


@dataclass(frozen=True)
class UrnState:
    """Ball counts by color (counts[i - 1] is color i) after `drawn` draws."""

    counts: tuple[int, ...]
    drawn: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def fractions(self) -> tuple[float, ...]:
        total = self.total
        return tuple(c / total for c in self.counts)


@dataclass(frozen=True)
class CouplingReport:
    """Outcome of growing a tree and an urn side by side."""

    m: int
    steps: int
    seed: int
    delta_mismatches: int
    profile_mismatches: int
    final_profile: GapProfile
    final_state: UrnState
    draws_by_color: dict[int, int] = field(default_factory=dict)

    @property
    def coupled(self) -> bool:
        return self.delta_mismatches == 0 and self.profile_mismatches == 0


def replacement_matrix(m: int) -> ReplacementMatrix:
    """Build the (2m-2)x(2m-2) replacement matrix.

    m = 2 uses the binary boundary matrix [[-1, 2], [1, 0]].
    """
    check_branching(m)
    if m == 2:
        return ReplacementMatrix(m=2, rows=((-1, 2), (1, 0)))

    size = 2 * m - 2
    rows = [[0] * size for _ in range(size)]
    new_leaf = m  # zero-based index of color m+1

    # Color 1: the last empty slot of a node gets a one-key leaf.
    rows[0][0] = -1
    rows[0][new_leaf] += 2
    # Colors 2..m: one empty slot fewer, plus a one-key leaf.
    for i in range(2, m + 1):
        rows[i - 1][i - 1] = -i
        rows[i - 1][i - 2] = i - 1
        rows[i - 1][new_leaf] += 2
    # Colors m+1..2m-3: a leaf with i-1 keys gains one.
    for i in range(2, m - 1):
        color = m + i - 1
        rows[color - 1][color - 1] = -i
        rows[color - 1][color] = i + 1
    # Color 2m-2: the leaf fills and exposes m gaps of color m.
    last = size - 1
    rows[last][last] = -(m - 1)
    rows[last][m - 1] = m

    return ReplacementMatrix(m=m, rows=tuple(tuple(r) for r in rows))


def initial_state(m: int) -> UrnState:
    """Urn of a one-key tree: two gaps in a single one-key leaf."""
    check_branching(m)
    counts = [0] * (2 * m - 2)
    first_leaf_color = m if m == 2 else m + 1
    counts[first_leaf_color - 1] = 2
    return UrnState(counts=tuple(counts))


def draw_and_replace(
    state: UrnState, matrix: ReplacementMatrix, color: int,
) -> UrnState:
    """Apply the replacement rule of a drawn color.

    Raises:
        TenabilityError: If no ball of that color is present, or the
            rule would leave a negative count.
    """
    if not 1 <= color <= matrix.size:
        raise TenabilityError(
            f"Color {color} is outside 1..{matrix.size}"
        )
    if state.counts[color - 1] < 1:
        raise TenabilityError(f"No ball of color {color} to draw")
    counts = tuple(
        c + d for c, d in zip(state.counts, matrix.row(color), strict=True)
    )
    if min(counts) < 0:
        raise TenabilityError(
            f"Drawing color {color} leaves a negative count: {counts}"
        )
    return UrnState(counts=counts, drawn=state.drawn + 1)


def _pick_color(counts: tuple[int, ...], ball: int) -> int:
    """Color of the ball-th ball when balls are laid out color by color."""
    for index, count in enumerate(counts):
        if ball < count:
            return index + 1
        ball -= count
    raise TenabilityError("Ball index exceeds urn total")


def simulate(m: int, steps: int, seed: int) -> UrnState:
    """Run the urn from its initial state for `steps` uniform draws."""
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    matrix = replacement_matrix(m)
    state = initial_state(m)
    rng = Xoshiro256StarStar(seed)
    for _ in range(steps):
        color = _pick_color(state.counts, rng.below(state.total))
        state = draw_and_replace(state, matrix, color)
    logger.debug("Urn m=%d after %d draws: %s", m, steps, state.counts)
    return state


def _leaf_code(held: int, m: int) -> int:
    return m + held if held < m - 1 else m


def coupled_insert_delta(
    tree: MaryTree, gap_index: int,
) -> tuple[int, tuple[int, ...]]:
    """Color of a gap and the gap-profile change of inserting there.

    Gaps are numbered 0..n by the in-order position of their key
    interval: gap g lies between the g-th and (g+1)-th smallest ranks.

    Raises:
        EmptyTreeError: If the tree holds no keys.
        GapIndexError: If gap_index is outside 0..n.
    """
    if tree.n == 0 or tree.root is None:
        raise EmptyTreeError()
    if not 0 <= gap_index <= tree.n:
        raise GapIndexError(
            f"Gap index {gap_index} outside 0..{tree.n}"
        )
    m = tree.m
    ranks = list(in_order(tree))
    if gap_index == 0:
        pivot, locate = ranks[0], bisect_left
    else:
        pivot, locate = ranks[gap_index - 1], bisect_right

    node = tree.root
    while True:
        before = classify_node(node, m)
        held = len(node.keys)
        if held < m - 1:
            after = _leaf_code(held + 1, m)
            spawned = None
            break
        child = node.children[locate(node.keys, pivot)]
        if child is None:
            remaining = node.empty_slots - 1
            after = 2 * m - 1 if remaining == 0 else remaining
            spawned = _leaf_code(1, m)
            break
        node = child

    delta = [0] * (2 * m - 2)
    drawn = gap_color(before, m)
    if drawn is None:
        raise TenabilityError(f"Gap {gap_index} resolved to a full node")
    color, gaps = drawn
    delta[color - 1] -= gaps
    for code in (after, spawned):
        if code is None:
            continue
        colored = gap_color(code, m)
        if colored is not None:
            delta[colored[0] - 1] += colored[1]
    return color, tuple(delta)


def coupled_growth(
    m: int, steps: int, seed: int, verify_profiles: bool = True,
) -> CouplingReport:
    """Grow a tree by uniform gap choices and mirror each draw in an urn.

    Gap choices come from a seeded random permutation of 1..steps+1:
    the gap hit by each successive rank is uniform over the current gaps.
    With verify_profiles, every step also diffs the full gap profile
    against the urn.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    matrix = replacement_matrix(m)
    perm = random_permutation(steps + 1, seed)
    tree = build_from_permutation(m, perm[:1])
    state = initial_state(m)
    placed = [perm[0]]
    draws: Counter[int] = Counter()
    delta_mismatches = 0
    profile_mismatches = 0
    previous = gap_profile(tree)

    for rank in perm[1:]:
        gap = bisect_left(placed, rank)
        insort(placed, rank)
        color, delta = coupled_insert_delta(tree, gap)
        draws[color] += 1
        if delta != matrix.row(color):
            delta_mismatches += 1
            logger.warning(
                "Color %d delta %s differs from matrix row %s",
                color, delta, matrix.row(color),
            )
        state = draw_and_replace(state, matrix, color)
        insert(tree, rank)
        if verify_profiles:
            current = gap_profile(tree)
            observed = tuple(
                a - b
                for a, b in zip(current.counts, previous.counts, strict=True)
            )
            if observed != delta or current.counts != state.counts:
                profile_mismatches += 1
            previous = current

    final = gap_profile(tree)
    if final.counts != state.counts and not verify_profiles:
        profile_mismatches += 1
    logger.info(
        "Coupled growth m=%d steps=%d: %d delta / %d profile mismatches",
        m, steps, delta_mismatches, profile_mismatches,
    )
    return CouplingReport(
        m=m,
        steps=steps,
        seed=seed,
        delta_mismatches=delta_mismatches,
        profile_mismatches=profile_mismatches,
        final_profile=final,
        final_state=state,
        draws_by_color=dict(sorted(draws.items())),
    )
