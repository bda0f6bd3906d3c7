"""Brute-force reference implementations, kept deliberately dumb.

These are the independent side of every dual-route check: full mapping-poset
enumeration for homotopy, and exhaustive cover search over *all* good open
sets for the distance.  Nothing here shares code with the production search.
"""

from __future__ import annotations

from homdist.finspace import (BudgetError, CMap, FiniteSpace, MapError, _bits,
                              _downset_masks, subspace)


def all_continuous_maps(source: FiniteSpace, target: FiniteSpace,
                        limit: int | None = None) -> list[tuple]:
    """Every order-preserving assignment, as index tuples in canonical order."""
    order = source._topo
    n = len(order)
    all_values = target.full_mask
    up = target.up
    # assigning along a linear extension, the allowed values at a point are
    # the intersection of the up-sets of the values already taken below it
    below_lists = [tuple(b for b in range(n) if b != i and source.leq_idx(b, i))
                   for i in order]
    out: list[tuple] = []
    assign = [0] * n

    def rec(k: int):
        if k == n:
            out.append(tuple(assign))
            if limit is not None and len(out) > limit:
                raise BudgetError(
                    f"more than {limit} continuous maps {source.name} -> {target.name}")
            return
        allowed = all_values
        for b in below_lists[k]:
            allowed &= up[assign[b]]
            if not allowed:
                return
        i = order[k]
        while allowed:
            low = allowed & -allowed
            allowed ^= low
            assign[i] = low.bit_length() - 1
            rec(k + 1)

    rec(0)
    return out


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _comparable(a: tuple, b: tuple, target: FiniteSpace) -> bool:
    down = target.down
    le = ge = True
    for x, y in zip(a, b):
        if not (down[y] >> x) & 1:
            le = False
        if not (down[x] >> y) & 1:
            ge = False
        if not (le or ge):
            return False
    return True


def mapping_poset_classes(source: FiniteSpace, target: FiniteSpace,
                          maps: list[tuple] | None = None,
                          pairwise: bool = True) -> dict[tuple, int]:
    """Homotopy class id for every continuous map source -> target.

    ``pairwise=True`` builds the literal comparability graph (quadratic);
    ``pairwise=False`` uses single-point-move edges, which generate the same
    components (a comparable pair is joined by moving one point at a time
    along a linear extension) and scale to the larger oracle instances.
    """
    if maps is None:
        maps = all_continuous_maps(source, target)
    uf = _UnionFind(len(maps))
    if pairwise:
        for i in range(len(maps)):
            for j in range(i + 1, len(maps)):
                if _comparable(maps[i], maps[j], target):
                    uf.union(i, j)
    else:
        index = {m: i for i, m in enumerate(maps)}
        ny = len(target.points)
        comparable_to = [tuple(j for j in range(ny)
                               if j != c and target.comparable_idx(c, j))
                         for c in range(ny)]
        union = uf.union
        get = index.get
        npts = len(source.points)
        for i, m in enumerate(maps):
            for k in range(npts):
                for j in comparable_to[m[k]]:
                    # membership in the enumerated list certifies continuity
                    at = get(m[:k] + (j,) + m[k + 1:])
                    if at is not None and at > i:
                        union(i, at)
    return {m: uf.find(i) for i, m in enumerate(maps)}


def naive_homotopic(f: CMap, g: CMap) -> bool:
    """Oracle homotopy decision via the full comparability graph."""
    if f.source != g.source or f.target != g.target:
        raise MapError("homotopy needs maps with equal source and target")
    classes = mapping_poset_classes(f.source, f.target)
    return classes[f.assign] == classes[g.assign]


def naive_distance(maps: list[CMap], pairwise: bool | None = None) -> int | None:
    """Exhaustive minimum cover by good open sets; None when no cover exists.

    Every down-set of the source is tested for goodness with the full
    mapping-poset class table of its induced subspace; the cover search then
    recurses over all good sets containing the first uncovered point.
    """
    if not maps:
        raise MapError("need at least one map")
    source, target = maps[0].source, maps[0].target
    for f in maps[1:]:
        if f.source != source or f.target != target:
            raise MapError("maps must share source and target")
    assigns = sorted({f.assign for f in maps})
    if len(assigns) == 1:
        return 1

    good_masks = []
    for mask in _downset_masks(source):
        if mask == 0:
            continue
        pts = source.points_of(mask)
        sub, _ = subspace(source, pts)
        restricted = sorted({tuple(a[source.index(p)] for p in sub.points)
                             for a in assigns})
        if len(restricted) == 1:
            good_masks.append(mask)
            continue
        all_maps = all_continuous_maps(sub, target)
        quad = len(all_maps) <= 400 if pairwise is None else pairwise
        classes = mapping_poset_classes(sub, target, all_maps, pairwise=quad)
        ids = {classes[r] for r in restricted}
        if len(ids) == 1:
            good_masks.append(mask)

    union = 0
    for m in good_masks:
        union |= m
    if union != source.full_mask:
        return None

    good_masks.sort(key=lambda m: -bin(m).count("1"))
    best = len(source.points) + 1

    def search(uncovered: int, depth: int):
        nonlocal best
        if not uncovered:
            best = min(best, depth)
            return
        if depth + 1 >= best:
            return
        first = uncovered & -uncovered
        for m in good_masks:
            if m & first:
                search(uncovered & ~m, depth + 1)

    search(source.full_mask, 0)
    return best
