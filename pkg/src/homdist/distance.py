"""Exact higher homotopic distance with certified witness covers.

The production path filters candidate open sets through a core-reduced
homotopy test, then runs an exact branch-and-bound set cover over the
inclusion-maximal good opens.  Above the open-set enumeration threshold an
equivalent exact search assigns points to cover blocks instead, so the
candidate family is never materialized.  Goodness is hereditary under open
subsets (fences restrict), which both searches rely on for pruning.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from homdist.finspace import (OPEN_SET_ENUM_THRESHOLD, CMap, CoreResult, Fence,
                              FiniteSpace, MapError, OpenSet, _bits,
                              _downset_masks, core_reduce, homotopic, open_sets,
                              subspace)


class NoFiniteDistance(Exception):
    """No good open family covers the source; the distance is undefined."""

    def __init__(self, point):
        self.point = point
        super().__init__(f"no good open set contains {point!r}; "
                         "the maps land in different path components there")


@dataclass(frozen=True)
class DistanceResult:
    """A distance value with its witness cover and per-piece homotopy fences."""

    value: int
    cover: tuple[OpenSet, ...]
    fences: tuple[tuple[Fence, ...], ...]   # fences[i][j]: maps j, j+1 on piece i
    maps: tuple[CMap, ...]

    def verify(self):
        """Re-check the witness invariants independently of the search path."""
        source = self.maps[0].source
        assert self.value == len(self.cover)
        union = 0
        for piece in self.cover:
            assert piece.space == source
            assert source.is_down_closed(piece.mask)
            union |= piece.mask
        assert union == source.full_mask, "cover does not exhaust the source"
        for piece, piece_fences in zip(self.cover, self.fences):
            sub, _ = subspace(source, piece.members)
            restricted = [f.restrict(sub) for f in self.maps]
            assert len(piece_fences) == max(len(self.maps) - 1, 0)
            for j, fence in enumerate(piece_fences):
                Fence(fence.steps)   # re-validates comparability and continuity
                assert fence.start.assign == restricted[j].assign
                assert fence.end.assign == restricted[j + 1].assign


def _shared_ends(maps) -> tuple[FiniteSpace, FiniteSpace]:
    if not maps:
        raise MapError("need at least one map")
    source, target = maps[0].source, maps[0].target
    for f in maps[1:]:
        if f.source != source or f.target != target:
            raise MapError("maps must share source and target")
    return source, target


class _GoodnessTester:
    """Decides whether all restrictions to a down-set are pairwise homotopic.

    Both spaces are core-reduced before the fence search: composing with
    homotopy equivalences preserves and reflects homotopy, and the cores cut
    the mapping posets down to sizes breadth-first search handles easily.
    """

    def __init__(self, maps):
        self.maps = tuple(maps)
        self.source, self.target = _shared_ends(self.maps)
        self.assigns = tuple(f.assign for f in self.maps)
        self.target_core = core_reduce(self.target)
        self.target_comp = self.target.component_ids()
        self._verdicts: dict[int, bool] = {}
        self._sub_cache: dict[int, tuple[FiniteSpace, CoreResult]] = {}

    def point_compatible(self, i: int) -> bool:
        """Necessary condition at a single source point (and sufficient on min opens)."""
        comps = {self.target_comp[a[i]] for a in self.assigns}
        return len(comps) == 1

    def subspace_core(self, mask: int) -> tuple[FiniteSpace, CoreResult]:
        hit = self._sub_cache.get(mask)
        if hit is None:
            sub, _ = subspace(self.source, self.source.points_of(mask))
            hit = (sub, core_reduce(sub))
            self._sub_cache[mask] = hit
        return hit

    def good(self, mask: int) -> bool:
        if mask == 0:
            return True
        verdict = self._verdicts.get(mask)
        if verdict is not None:
            return verdict
        verdict = self._decide(mask)
        self._verdicts[mask] = verdict
        return verdict

    def _decide(self, mask: int) -> bool:
        idxs = tuple(_bits(mask))
        restricted = {tuple(a[i] for i in idxs) for a in self.assigns}
        if len(restricted) == 1:
            return True
        for i in idxs:
            if not self.point_compatible(i):
                return False
        sub, sub_core = self.subspace_core(mask)
        r_y = self.target_core.retraction.assign
        core_idx = [self.source.index(p) for p in sub_core.core.points]
        reduced = sorted({tuple(r_y[a[i]] for i in core_idx) for a in self.assigns})
        if len(reduced) == 1:
            return True
        return self._connected(sub_core.core, self.target_core.core, reduced)

    @staticmethod
    def _connected(dom: FiniteSpace, cod: FiniteSpace, reduced: list[tuple]) -> bool:
        """BFS the fence component of reduced[0] until the others appear."""
        missing = set(reduced[1:])
        start = reduced[0]
        seen = {start}
        queue = deque([start])
        n = len(dom.points)
        cod_up, cod_down = cod.up, cod.down
        comp_mask = [((cod_up[c] | cod_down[c]) & ~(1 << c)) for c in
                     range(len(cod.points))]
        below = [tuple(_bits(dom.down[i] & ~(1 << i))) for i in range(n)]
        above = [tuple(_bits(dom.up[i] & ~(1 << i))) for i in range(n)]
        while queue and missing:
            cur = queue.popleft()
            for i in range(n):
                allowed = comp_mask[cur[i]]
                for k in below[i]:
                    allowed &= cod_up[cur[k]]
                    if not allowed:
                        break
                for k in above[i]:
                    if not allowed:
                        break
                    allowed &= cod_down[cur[k]]
                while allowed:
                    low = allowed & -allowed
                    allowed ^= low
                    nxt = cur[:i] + (low.bit_length() - 1,) + cur[i + 1:]
                    if nxt not in seen:
                        seen.add(nxt)
                        missing.discard(nxt)
                        queue.append(nxt)
        return not missing


def good_open_family(maps, threshold: int | None = None) -> list[OpenSet]:
    """All inclusion-maximal open sets on which the restrictions are one class.

    Deterministic order: larger pieces first, ties by member indices.
    """
    tester = _GoodnessTester(maps)
    candidates = open_sets(tester.source, threshold)
    masks = _maximal_good_masks(tester, [u.mask for u in candidates])
    return [OpenSet(tester.source, m) for m in masks]


def _maximal_good_masks(tester: _GoodnessTester, masks: list[int]) -> list[int]:
    good = [m for m in masks if m and tester.good(m)]
    good.sort(key=lambda m: -bin(m).count("1"))
    maximal: list[int] = []
    for m in good:
        if not any(m & ~big == 0 for big in maximal):
            maximal.append(m)
    maximal.sort(key=lambda m: (-bin(m).count("1"), tuple(_bits(m))))
    return maximal


def min_cover(universe, candidates: list[OpenSet]) -> list[OpenSet] | None:
    """Exact minimum subfamily of ``candidates`` covering ``universe``.

    Greedy seeds the upper bound; branch-and-bound with the largest-candidate
    lower bound certifies minimality.  Ties break toward the canonical
    candidate order, so witnesses are stable.
    """
    if isinstance(universe, int):
        target_mask = universe
    else:
        universe = tuple(universe)
        target_mask = candidates[0].space.mask_of(universe) if candidates else (
            0 if not universe else 1)
    if target_mask == 0:
        return []
    if not candidates:
        return None
    masks = [c.mask for c in candidates]
    union = 0
    for m in masks:
        union |= m
    if target_mask & ~union:
        return None

    greedy: list[int] = []
    left = target_mask
    while left:
        pick = max(range(len(masks)), key=lambda k: (bin(masks[k] & left).count("1"), -k))
        greedy.append(pick)
        left &= ~masks[pick]
    best: list[int] = greedy
    largest = max(bin(m).count("1") for m in masks)

    cover_by: dict[int, list[int]] = {}
    for i in _bits(target_mask):
        cover_by[i] = [k for k, m in enumerate(masks) if (m >> i) & 1]

    chosen: list[int] = []

    def search(uncovered: int):
        nonlocal best
        if not uncovered:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        need = bin(uncovered).count("1")
        if len(chosen) + (need + largest - 1) // largest >= len(best):
            return
        pivot = min(_bits(uncovered), key=lambda i: len(cover_by[i]))
        for k in cover_by[pivot]:
            chosen.append(k)
            search(uncovered & ~masks[k])
            chosen.pop()

    search(target_mask)
    picked = sorted(best)
    return [candidates[k] for k in picked]


def _fence_between(f: CMap, g: CMap) -> Fence:
    """Deterministic fence between two maps already known to be homotopic.

    Routed through the domain and codomain cores: the search happens in the
    small core mapping poset and the result is transported back along the
    explicit retraction fences.
    """
    if f.assign == g.assign:
        return Fence([f])
    dom_core = core_reduce(f.source)
    cod_core = core_reduce(f.target)
    red = lambda h: cod_core.retraction.after(h).after(dom_core.inclusion)
    core_fence = homotopic(red(f), red(g))
    if core_fence is None:
        raise MapError(f"{f.name} and {g.name} are not homotopic")

    to_collapsed_f = [f.after(step) for step in dom_core.fence.steps]   # f .. f.i.r
    to_collapsed_g = [g.after(step) for step in dom_core.fence.steps]
    f_low = to_collapsed_f[-1]
    g_low = to_collapsed_g[-1]
    through_cod_f = [step.after(f_low) for step in cod_core.fence.steps]
    through_cod_g = [step.after(g_low) for step in cod_core.fence.steps]
    middle = [cod_core.inclusion.after(h).after(dom_core.retraction)
              for h in core_fence.steps]

    assigns = []
    for h in (to_collapsed_f + through_cod_f + middle
              + list(reversed(through_cod_g)) + list(reversed(to_collapsed_g))):
        if not assigns or assigns[-1] != h.assign:
            assigns.append(h.assign)
    steps = [f]
    for k, a in enumerate(assigns[1:-1], start=1):
        steps.append(CMap(f"{f.name}~{k}", f.source, f.target, a))
    steps.append(g)
    return Fence(steps)


def _piece_fences(maps, piece: OpenSet) -> tuple[Fence, ...]:
    sub, _ = subspace(piece.space, piece.members)
    restricted = [f.restrict(sub) for f in maps]
    return tuple(_fence_between(a, b) for a, b in zip(restricted, restricted[1:]))


def _block_search(tester: _GoodnessTester) -> list[int]:
    """Exact minimum cover without enumerating the candidate family.

    Points are processed in canonical order; each uncovered point either
    joins an existing block (closing downward, goodness rechecked) or opens
    a new one.  Hereditary goodness makes the pruning sound, so exhausting
    the tree certifies minimality.
    """
    source = tester.source
    full = source.full_mask

    greedy: list[int] = []
    left = full
    while left:
        seed = left & -left
        mask = source.down[seed.bit_length() - 1]
        for i in range(len(source.points)):
            if (mask >> i) & 1:
                continue
            grown = mask | source.down[i]
            if tester.good(grown):
                mask = grown
        greedy.append(mask)
        left &= ~mask
    best: list[int] = greedy

    blocks: list[int] = []

    def search(uncovered: int):
        nonlocal best
        if not uncovered:
            if len(blocks) < len(best):
                best = list(blocks)
            return
        if len(blocks) >= len(best):
            return
        i = (uncovered & -uncovered).bit_length() - 1
        grow = source.down[i]
        for b in range(len(blocks)):
            cand = blocks[b] | grow
            if tester.good(cand):
                saved = blocks[b]
                blocks[b] = cand
                search(uncovered & ~cand)
                blocks[b] = saved
        if len(blocks) + 1 < len(best) and tester.good(grow):
            blocks.append(grow)
            search(uncovered & ~grow)
            blocks.pop()

    search(full)
    return best


_LAZY_DOWNSET_CAP = 150_000


def _capped_downset_masks(space: FiniteSpace, cap: int) -> list[int] | None:
    """All down-set masks, or None as soon as more than ``cap`` exist."""
    order = space._topo
    strict = [space.down[i] & ~(1 << i) for i in range(len(space.points))]
    out: list[int] = []

    def rec(k: int, cur: int) -> bool:
        if k == len(order):
            out.append(cur)
            return len(out) <= cap
        i = order[k]
        if not rec(k + 1, cur):
            return False
        if strict[i] & ~cur == 0:
            return rec(k + 1, cur | (1 << i))
        return True

    return out if rec(0, 0) else None


def higher_distance(maps, threshold: int | None = None) -> DistanceResult:
    """Minimum size of an open cover on which all maps are pairwise homotopic.

    Raises NoFiniteDistance when some point sees the maps in different path
    components of the target (then no cover exists).
    """
    maps = tuple(maps)
    tester = _GoodnessTester(maps)
    source = tester.source

    if tester.good(source.full_mask):
        piece = OpenSet(source, source.full_mask)
        return DistanceResult(1, (piece,), (_piece_fences(maps, piece),), maps)

    for i in range(len(source.points)):
        if not tester.point_compatible(i):
            raise NoFiniteDistance(source.points[i])

    # the distance only depends on the homotopy class of the domain, so the
    # search runs on the core and the witness cover is pulled back along the
    # retraction (preimages of good opens stay open and good)
    dom_core = core_reduce(source)
    if len(dom_core.core.points) < len(source.points):
        reduced = higher_distance([f.after(dom_core.inclusion) for f in maps],
                                  threshold)
        retract = dom_core.retraction.assign
        chosen = []
        for piece in reduced.cover:
            mask = 0
            for i, r in enumerate(retract):
                if (piece.mask >> r) & 1:
                    mask |= 1 << i
            chosen.append(mask)
    else:
        chosen = _search_cover(tester, threshold)

    chosen.sort(key=lambda m: (-bin(m).count("1"), tuple(_bits(m))))
    pieces = tuple(OpenSet(source, m) for m in chosen)
    fences = tuple(_piece_fences(maps, piece) for piece in pieces)
    return DistanceResult(len(pieces), pieces, fences, maps)


def _search_cover(tester: _GoodnessTester, threshold: int | None) -> list[int]:
    source = tester.source
    limit = OPEN_SET_ENUM_THRESHOLD if threshold is None else threshold
    if len(source.points) <= limit:
        masks = _downset_masks(source)
    else:
        masks = _capped_downset_masks(source, _LAZY_DOWNSET_CAP)
    if masks is None:
        return _block_search(tester)
    family = [OpenSet(source, m) for m in _maximal_good_masks(tester, masks)]
    cover = min_cover(source.full_mask, family)
    return [piece.mask for piece in cover]


def subspace_distance(members, maps, threshold: int | None = None) -> DistanceResult:
    """Distance of the restrictions to a subspace of the shared source."""
    source, _ = _shared_ends(maps)
    sub, _ = subspace(source, members)
    return higher_distance([f.restrict(sub) for f in maps], threshold)
