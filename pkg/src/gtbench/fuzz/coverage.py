"""Edge-coverage map with bucketized hit counts.

Classic greybox design: a 64 KiB byte map indexed by the XOR of the previous
(right-shifted) and current location ids.  Raw hit counts are bucketized into
power-of-two classes so the fuzzer reacts to order-of-magnitude changes in
loop counts rather than every increment:

    count:  1   2   3   4-7   8-15   16-31   32-127   128+
    class:  0   1   2   3     4      5       6        7
"""

from __future__ import annotations

MAP_SIZE = 65536

# count (saturated at 255) -> class bit, as a flat lookup table
_CLASS_OF_COUNT = [0] * 256
for _count in range(1, 256):
    if _count == 1:
        _cls = 0
    elif _count == 2:
        _cls = 1
    elif _count == 3:
        _cls = 2
    elif _count <= 7:
        _cls = 3
    elif _count <= 15:
        _cls = 4
    elif _count <= 31:
        _cls = 5
    elif _count <= 127:
        _cls = 6
    else:
        _cls = 7
    _CLASS_OF_COUNT[_count] = 1 << _cls


def coverage_index(prev_loc: int, cur_loc: int) -> int:
    """Map index for a transition between two instrumentation sites.

    The caller updates its running state with ``prev_loc = cur_loc >> 1``
    after each visit (the shift keeps A->B distinct from B->A).
    """
    return (prev_loc ^ cur_loc) % MAP_SIZE


def bucket_bit(count: int) -> int:
    """Class bit for a raw hit count (counts saturate at 255)."""
    return _CLASS_OF_COUNT[min(count, 255)]


class CoverageMap:
    """Per-execution hit counts over the fixed-size edge map.

    Tracks touched indices so per-execution scans cost O(edges visited)
    instead of O(MAP_SIZE).
    """

    __slots__ = ("counts", "touched")

    def __init__(self):
        self.counts = bytearray(MAP_SIZE)
        self.touched: set[int] = set()

    def record(self, index: int) -> None:
        c = self.counts[index]
        if c < 255:
            self.counts[index] = c + 1
        self.touched.add(index)

    def reset(self) -> None:
        for index in self.touched:
            self.counts[index] = 0
        self.touched.clear()

    def class_items(self) -> list[tuple[int, int]]:
        """(index, class bit) pairs for every touched edge, deterministic order."""
        counts = self.counts
        return [(index, _CLASS_OF_COUNT[counts[index]]) for index in sorted(self.touched)]

    def signature(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.class_items())


class EdgeTracer:
    """Visitor handed to the target; implements the prev^cur indexing scheme.

    Also carries the optional comparison-progress side channel: when the aid
    is enabled, per-comparison prefix-match lengths are folded into the map
    as pseudo-edges, so incremental progress on a magic-value check looks
    like new coverage.  Off by default.
    """

    __slots__ = ("map", "prev", "cmp_aid")

    def __init__(self, cov_map: CoverageMap, cmp_aid: bool = False):
        self.map = cov_map
        self.prev = 0
        self.cmp_aid = cmp_aid

    def visit(self, loc: int) -> None:
        self.map.record((self.prev ^ loc) % MAP_SIZE)
        self.prev = loc >> 1

    def note_cmp(self, site: int, prefix_len: int) -> None:
        if self.cmp_aid:
            self.map.record(((site << 3) ^ (prefix_len * 0x9E3779B1)) % MAP_SIZE)

    def reset(self) -> None:
        self.prev = 0


class GlobalCoverage:
    """Union of bucket classes observed across a whole campaign.

    The per-index byte is a bitmask of classes ever seen, so the map only
    grows: the set of (index, class) pairs is monotone over a campaign.
    """

    __slots__ = ("classes", "edge_count")

    def __init__(self):
        self.classes = bytearray(MAP_SIZE)
        self.edge_count = 0

    def class_pairs(self) -> set[tuple[int, int]]:
        pairs = set()
        for index, mask in enumerate(self.classes):
            bit = 1
            while bit <= mask:
                if mask & bit:
                    pairs.add((index, bit))
                bit <<= 1
        return pairs


def is_interesting(run: CoverageMap, global_cov: GlobalCoverage) -> bool:
    """True iff the run shows a bucket class not yet in the global map.

    On True the global map absorbs the run's new classes (and only then), so
    the first input is always interesting and an identical rerun never is.
    """
    counts = run.counts
    classes = global_cov.classes
    new = False
    for index in run.touched:
        bit = _CLASS_OF_COUNT[counts[index]]
        if bit & ~classes[index]:
            new = True
            break
    if not new:
        return False
    for index in run.touched:
        bit = _CLASS_OF_COUNT[counts[index]]
        if bit & ~classes[index]:
            if classes[index] == 0:
                global_cov.edge_count += 1
            classes[index] |= bit
    return True
