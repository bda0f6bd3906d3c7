"""Finite T0 spaces as posets, continuous maps, and the fence homotopy calculus.

Convention fixed for the whole package: the open sets of a space are the
down-sets of the stored order, so the minimal open neighbourhood of x is
{y : y <= x}.  Point subsets are handled as bitmasks over the canonical
point order (declaration order), which keeps every search reproducible.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

OPEN_SET_ENUM_THRESHOLD = 20


class SpaceError(Exception):
    """Invalid space data: cycles, unknown points, empty carriers."""


class MapError(Exception):
    """Invalid map data: partial assignments, broken continuity, mismatched ends."""


class ParseError(Exception):
    """Malformed space/map file text."""


class BudgetError(Exception):
    """An enumeration or product-size budget was exceeded."""


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class FiniteSpace:
    """A finite T0 space stored as a partial order on named points.

    ``down[i]`` is the bitmask of indices j with p_j <= p_i; it is also the
    minimal open set of p_i.  Equality is structural (points and order),
    the name is presentation only.
    """

    __slots__ = ("name", "points", "down", "up", "full_mask", "_index",
                 "_comp_id", "_topo")

    def __init__(self, name: str, points, down):
        points = tuple(points)
        down = tuple(down)
        if not points:
            raise SpaceError("empty space rejected")
        if len(set(points)) != len(points):
            raise SpaceError("duplicate point")
        if len(down) != len(points):
            raise SpaceError("order data does not match point list")
        n = len(points)
        full = (1 << n) - 1
        for i, m in enumerate(down):
            if m & ~full:
                raise SpaceError("relation references an undeclared point")
            if not (m >> i) & 1:
                raise SpaceError("order not reflexive")
        for i in range(n):
            for j in _bits(down[i]):
                if down[j] & ~down[i]:
                    raise SpaceError("order not transitive")
                if i != j and (down[j] >> i) & 1:
                    raise SpaceError(
                        f"cycle: {points[i]!r} and {points[j]!r} are mutually below each other")
        self.name = name
        self.points = points
        self.down = down
        self.full_mask = full
        up = [0] * n
        for i in range(n):
            for j in _bits(down[i]):
                up[j] |= 1 << i
        self.up = tuple(up)
        self._index = {p: i for i, p in enumerate(points)}
        self._comp_id = None
        # any order sorted by |down set| is a linear extension
        self._topo = tuple(sorted(range(n), key=lambda i: (bin(down[i]).count("1"), i)))

    @classmethod
    def from_relations(cls, name: str, points, pairs) -> "FiniteSpace":
        """Build from generator pairs (a, b) meaning a < b; closure is computed."""
        points = tuple(points)
        index = {p: i for i, p in enumerate(points)}
        if len(index) != len(points):
            raise SpaceError("duplicate point")
        down = [1 << i for i in range(len(points))]
        for a, b in pairs:
            if a not in index or b not in index:
                raise SpaceError(f"relation on undeclared point: {a!r} < {b!r}")
            down[index[b]] |= 1 << index[a]
        changed = True
        while changed:
            changed = False
            for i in range(len(points)):
                acc = down[i]
                for j in _bits(down[i]):
                    acc |= down[j]
                if acc != down[i]:
                    down[i] = acc
                    changed = True
        return cls(name, points, down)

    # -- basic queries -------------------------------------------------

    def __len__(self):
        return len(self.points)

    def __contains__(self, p):
        return p in self._index

    def __eq__(self, other):
        return (isinstance(other, FiniteSpace)
                and self.points == other.points and self.down == other.down)

    def __hash__(self):
        return hash((self.points, self.down))

    def __repr__(self):
        return f"FiniteSpace({self.name!r}, {len(self.points)} points)"

    def index(self, p) -> int:
        try:
            return self._index[p]
        except KeyError:
            raise SpaceError(f"{p!r} is not a point of {self.name}") from None

    def leq(self, x, y) -> bool:
        return bool((self.down[self.index(y)] >> self.index(x)) & 1)

    def leq_idx(self, i: int, j: int) -> bool:
        return bool((self.down[j] >> i) & 1)

    def comparable_idx(self, i: int, j: int) -> bool:
        return bool(((self.down[j] >> i) | (self.down[i] >> j)) & 1)

    def mask_of(self, pts) -> int:
        m = 0
        for p in pts:
            m |= 1 << self.index(p)
        return m

    def points_of(self, mask: int) -> tuple:
        return tuple(self.points[i] for i in _bits(mask))

    def minimal_open(self, p) -> int:
        return self.down[self.index(p)]

    def down_closure(self, mask: int) -> int:
        acc = 0
        for i in _bits(mask):
            acc |= self.down[i]
        return acc

    def is_down_closed(self, mask: int) -> bool:
        return self.down_closure(mask) == mask

    def component_ids(self) -> tuple:
        """Component index per point of the comparability graph."""
        if self._comp_id is None:
            n = len(self.points)
            comp = [-1] * n
            nxt = 0
            for s in range(n):
                if comp[s] >= 0:
                    continue
                comp[s] = nxt
                queue = deque([s])
                while queue:
                    i = queue.popleft()
                    for j in _bits(self.down[i] | self.up[i]):
                        if comp[j] < 0:
                            comp[j] = nxt
                            queue.append(j)
                nxt += 1
            self._comp_id = tuple(comp)
        return self._comp_id

    def is_path_connected(self) -> bool:
        return max(self.component_ids(), default=0) == 0


@dataclass(frozen=True)
class OpenSet:
    """A down-set of a space, identified by bitmask."""

    space: FiniteSpace
    mask: int

    def __post_init__(self):
        if self.mask & ~self.space.full_mask:
            raise SpaceError("open set references points outside its space")
        if not self.space.is_down_closed(self.mask):
            raise SpaceError("set is not down-closed, hence not open")

    @property
    def members(self) -> tuple:
        return self.space.points_of(self.mask)

    def __len__(self):
        return bin(self.mask).count("1")

    def __contains__(self, p):
        return bool((self.mask >> self.space.index(p)) & 1)

    def __le__(self, other):
        return self.mask & ~other.mask == 0


class CMap:
    """An order-preserving (= continuous) map between finite spaces."""

    __slots__ = ("name", "source", "target", "assign")

    def __init__(self, name: str, source: FiniteSpace, target: FiniteSpace, assign):
        assign = tuple(assign)
        if len(assign) != len(source.points):
            raise MapError(f"{name}: assignment is not total on the source")
        for j in assign:
            if not 0 <= j < len(target.points):
                raise MapError(f"{name}: value index out of range")
        for i, di in enumerate(source.down):
            ti = assign[i]
            for j in _bits(di):
                if not target.leq_idx(assign[j], ti):
                    raise MapError(
                        f"{name}: not continuous at {source.points[j]!r} <= "
                        f"{source.points[i]!r}")
        self.name = name
        self.source = source
        self.target = target
        self.assign = assign

    @classmethod
    def from_dict(cls, name: str, source: FiniteSpace, target: FiniteSpace,
                  mapping) -> "CMap":
        missing = [p for p in source.points if p not in mapping]
        if missing:
            raise MapError(f"{name}: no value for point {missing[0]!r}")
        return cls(name, source, target,
                   (target.index(mapping[p]) for p in source.points))

    @classmethod
    def identity(cls, space: FiniteSpace) -> "CMap":
        return cls(f"id_{space.name}", space, space, range(len(space.points)))

    @classmethod
    def constant(cls, source: FiniteSpace, target: FiniteSpace, value) -> "CMap":
        j = target.index(value)
        return cls(f"const_{value}", source, target, [j] * len(source.points))

    def __call__(self, p):
        return self.target.points[self.assign[self.source.index(p)]]

    def __eq__(self, other):
        return (isinstance(other, CMap) and self.source == other.source
                and self.target == other.target and self.assign == other.assign)

    def __hash__(self):
        return hash((self.source, self.target, self.assign))

    def __repr__(self):
        return f"CMap({self.name}: {self.source.name} -> {self.target.name})"

    def after(self, inner: "CMap") -> "CMap":
        """Composition self . inner."""
        if inner.target != self.source:
            raise MapError(f"cannot compose {self.name} after {inner.name}")
        return CMap(f"{self.name}.{inner.name}", inner.source, self.target,
                    (self.assign[j] for j in inner.assign))

    def restrict(self, sub: FiniteSpace) -> "CMap":
        """Restriction to a subspace whose points are points of the source."""
        return CMap(f"{self.name}|", sub, self.target,
                    (self.assign[self.source.index(p)] for p in sub.points))

    def image_mask(self) -> int:
        m = 0
        for j in self.assign:
            m |= 1 << j
        return m

    def is_surjective(self) -> bool:
        return self.image_mask() == self.target.full_mask

    def comparable_with(self, other: "CMap") -> bool:
        """Pointwise f <= g everywhere or f >= g everywhere."""
        if self.source != other.source or self.target != other.target:
            return False
        le = ge = True
        for a, b in zip(self.assign, other.assign):
            if not self.target.leq_idx(a, b):
                le = False
            if not self.target.leq_idx(b, a):
                ge = False
            if not (le or ge):
                return False
        return True


class Fence:
    """A homotopy witness: consecutive steps pointwise comparable, one direction each."""

    __slots__ = ("steps",)

    def __init__(self, steps):
        steps = tuple(steps)
        if not steps:
            raise MapError("a fence needs at least one map")
        first = steps[0]
        for s in steps:
            if s.source != first.source or s.target != first.target:
                raise MapError("fence steps must share source and target")
        for a, b in zip(steps, steps[1:]):
            if not a.comparable_with(b):
                raise MapError("consecutive fence steps are not pointwise comparable")
        self.steps = steps

    @property
    def start(self) -> CMap:
        return self.steps[0]

    @property
    def end(self) -> CMap:
        return self.steps[-1]

    @property
    def length(self) -> int:
        return len(self.steps) - 1

    def reverse(self) -> "Fence":
        return Fence(tuple(reversed(self.steps)))

    def concat(self, other: "Fence") -> "Fence":
        if self.end.assign != other.start.assign:
            raise MapError("fences do not meet")
        return Fence(self.steps + other.steps[1:])

    def __repr__(self):
        return f"Fence(length={self.length})"


# -- file formats ------------------------------------------------------

def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_space(text: str) -> FiniteSpace:
    """Parse the space-file format: ``space N`` / ``points ...`` / ``rel a < b``."""
    name = None
    points = None
    pairs = []
    for lineno, line in _content_lines(text):
        head, *rest = line.split()
        if head == "space":
            if len(rest) != 1 or name is not None:
                raise ParseError(f"line {lineno}: malformed space line")
            name = rest[0]
        elif head == "points":
            if points is not None:
                raise ParseError(f"line {lineno}: repeated points line")
            if not rest:
                raise ParseError(f"line {lineno}: empty point list")
            points = rest
        elif head == "rel":
            if len(rest) != 3 or rest[1] != "<":
                raise ParseError(f"line {lineno}: expected 'rel p < q'")
            pairs.append((rest[0], rest[2]))
        else:
            raise ParseError(f"line {lineno}: unknown directive {head!r}")
    if name is None or points is None:
        raise ParseError("space file needs a space line and a points line")
    if len(set(points)) != len(points):
        raise ParseError("duplicate point")
    try:
        return FiniteSpace.from_relations(name, points, pairs)
    except SpaceError as exc:
        raise ParseError(str(exc)) from exc


def parse_map(text: str, spaces: dict) -> CMap:
    """Parse the map-file format against already-loaded spaces (by name)."""
    header = None
    mapping = {}
    for lineno, line in _content_lines(text):
        if line.startswith("map "):
            parts = line.split()
            if len(parts) != 6 or parts[2] != "from" or parts[4] != "to":
                raise ParseError(f"line {lineno}: expected 'map f from X to Y'")
            if header is not None:
                raise ParseError(f"line {lineno}: repeated map line")
            header = (parts[1], parts[3], parts[5])
        elif "->" in line:
            left, _, right = line.partition("->")
            src, dst = left.strip(), right.strip()
            if not src or not dst:
                raise ParseError(f"line {lineno}: malformed assignment")
            if src in mapping:
                raise ParseError(f"line {lineno}: repeated assignment for {src!r}")
            mapping[src] = dst
        else:
            raise ParseError(f"line {lineno}: unknown directive")
    if header is None:
        raise ParseError("map file needs a map line")
    mname, sname, tname = header
    for want in (sname, tname):
        if want not in spaces:
            raise ParseError(f"map {mname}: unknown space {want!r}")
    try:
        return CMap.from_dict(mname, spaces[sname], spaces[tname], mapping)
    except (MapError, SpaceError) as exc:
        raise ParseError(str(exc)) from exc


# -- constructions -----------------------------------------------------

def product(spaces) -> FiniteSpace:
    """Componentwise-ordered product; points are tuples (a single factor is returned as is)."""
    spaces = list(spaces)
    if not spaces:
        raise SpaceError("product of an empty list")
    if len(spaces) == 1:
        return spaces[0]
    points = list(itertools.product(*(s.points for s in spaces)))
    sizes = [len(s.points) for s in spaces]
    index = {p: i for i, p in enumerate(points)}
    down = []
    for pt in points:
        factor_masks = [s.down[s.index(c)] for s, c in zip(spaces, pt)]
        acc = 0
        for below in itertools.product(*(tuple(_bits(m)) for m in factor_masks)):
            flat = 0
            for j, sz in zip(below, sizes):
                flat = flat * sz + j
            acc |= 1 << flat
        down.append(acc)
    name = " x ".join(s.name for s in spaces)
    return FiniteSpace(name, points, down)


def subspace(space: FiniteSpace, members) -> tuple[FiniteSpace, CMap]:
    """Induced-order subspace plus its inclusion map."""
    members = list(members)
    if not members:
        raise SpaceError("empty subspace rejected")
    idxs = sorted({space.index(p) for p in members})
    pts = [space.points[i] for i in idxs]
    pos = {i: k for k, i in enumerate(idxs)}
    down = []
    for i in idxs:
        m = 0
        for j in _bits(space.down[i]):
            if j in pos:
                m |= 1 << pos[j]
        down.append(m)
    sub = FiniteSpace(f"{space.name}_sub", pts, down)
    incl = CMap(f"incl_{space.name}", sub, space, idxs)
    return sub, incl


def open_sets(space: FiniteSpace, threshold: int | None = None) -> list[OpenSet]:
    """All down-sets in canonical order (by size, then member indices).

    Raises BudgetError above the enumeration threshold; callers then fall
    back to the lazy search in the distance module.
    """
    limit = OPEN_SET_ENUM_THRESHOLD if threshold is None else threshold
    if len(space.points) > limit:
        raise BudgetError(
            f"{space.name}: {len(space.points)} points exceeds the open-set "
            f"enumeration threshold {limit}")
    masks = _downset_masks(space)
    masks.sort(key=lambda m: (bin(m).count("1"), tuple(_bits(m))))
    return [OpenSet(space, m) for m in masks]


def _downset_masks(space: FiniteSpace) -> list[int]:
    order = space._topo
    strict = [space.down[i] & ~(1 << i) for i in range(len(space.points))]
    out = []

    def rec(k: int, cur: int):
        if k == len(order):
            out.append(cur)
            return
        i = order[k]
        rec(k + 1, cur)
        if strict[i] & ~cur == 0:
            rec(k + 1, cur | (1 << i))

    rec(0, 0)
    return out


def path_components(space: FiniteSpace) -> list[tuple]:
    """Partition of the points; one block per path component."""
    comp = space.component_ids()
    blocks: dict[int, list] = {}
    for p, c in zip(space.points, comp):
        blocks.setdefault(c, []).append(p)
    return [tuple(blocks[c]) for c in sorted(blocks)]


def is_continuous(source: FiniteSpace, target: FiniteSpace, mapping) -> bool:
    """True iff the total assignment is order-preserving."""
    try:
        CMap.from_dict("candidate", source, target, mapping)
    except MapError:
        return False
    return True


# -- homotopy ----------------------------------------------------------

def _move_path(f: CMap, g: CMap) -> list[tuple] | None:
    """Shortest single-point-move path from f to g, or None."""
    source, target = f.source, f.target
    start, goal = f.assign, g.assign
    if start == goal:
        return [start]
    comp = target.component_ids()
    for a, b in zip(start, goal):
        if comp[a] != comp[b]:
            return None
    n = len(source.points)
    t_up, t_down = target.up, target.down
    comp_mask = [((t_up[c] | t_down[c]) & ~(1 << c)) for c in range(len(target.points))]
    below = [tuple(_bits(source.down[i] & ~(1 << i))) for i in range(n)]
    above = [tuple(_bits(source.up[i] & ~(1 << i))) for i in range(n)]
    parent = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for i in range(n):
            allowed = comp_mask[cur[i]]
            for k in below[i]:
                allowed &= t_up[cur[k]]
                if not allowed:
                    break
            for k in above[i]:
                if not allowed:
                    break
                allowed &= t_down[cur[k]]
            while allowed:
                low = allowed & -allowed
                allowed ^= low
                nxt = cur[:i] + (low.bit_length() - 1,) + cur[i + 1:]
                if nxt in parent:
                    continue
                parent[nxt] = cur
                if nxt == goal:
                    path = [nxt]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])
                    path.reverse()
                    return path
                queue.append(nxt)
    return None


def _compress_path(path: list[tuple], target: FiniteSpace) -> list[tuple]:
    """Merge runs of same-direction moves; endpoints of a run are comparable."""
    if len(path) <= 1:
        return path
    out = [path[0]]
    direction = 0
    for prev, cur in zip(path, path[1:]):
        i = next(k for k in range(len(prev)) if prev[k] != cur[k])
        step = 1 if target.leq_idx(prev[i], cur[i]) else -1
        if step == direction:
            out[-1] = cur
        else:
            out.append(cur)
            direction = step
    return out


def homotopic(f: CMap, g: CMap) -> Fence | None:
    """A fence joining f to g if they are homotopic, else None.

    Breadth-first over single-point moves (which realize exactly the fence
    components of the mapping poset), then monotone runs are merged so that
    pointwise-comparable maps come back at fence distance 1.
    """
    if f.source != g.source or f.target != g.target:
        raise MapError("homotopy needs maps with equal source and target")
    path = _move_path(f, g)
    if path is None:
        return None
    path = _compress_path(path, f.target)
    steps = [f]
    for k, assign in enumerate(path[1:], start=1):
        steps.append(CMap(f"{f.name}~{k}", f.source, f.target, assign))
    if len(steps) > 1:
        steps[-1] = g
    return Fence(steps)


@dataclass(frozen=True)
class CoreResult:
    """A beatless deformation retract with the witnessing maps."""

    core: FiniteSpace
    inclusion: CMap        # core -> X
    retraction: CMap       # X -> core
    fence: Fence           # id_X to inclusion.retraction, inside maps(X, X)

    @property
    def is_point(self) -> bool:
        return len(self.core.points) == 1


def _find_beat(space: FiniteSpace) -> tuple[int, int] | None:
    """First (point, collapse-target) pair in canonical order, if any."""
    n = len(space.points)
    for i in range(n):
        sd = space.down[i] & ~(1 << i)
        if sd:
            for j in _bits(sd):
                if sd & ~space.down[j] == 0:
                    return i, j
        su = space.up[i] & ~(1 << i)
        if su:
            for j in _bits(su):
                if su & ~space.up[j] == 0:
                    return i, j
    return None


def core_reduce(space: FiniteSpace) -> CoreResult:
    """Iteratively strip beat points; returns the core with retraction data."""
    cur = space
    collapse = list(range(len(space.points)))   # X -> current stage, by original index
    stage_maps = []                             # X -> X composites, one per removal
    while True:
        beat = _find_beat(cur)
        if beat is None:
            break
        b, t = beat
        keep = [p for k, p in enumerate(cur.points) if k != b]
        nxt, _ = subspace(cur, keep)
        step = [nxt.index(cur.points[k] if k != b else cur.points[t])
                for k in range(len(cur.points))]
        collapse = [step[k] for k in collapse]
        stage_maps.append(tuple(space.index(nxt.points[k]) for k in collapse))
        cur = nxt
    core = cur
    if core is not space:
        core.name = f"core_{space.name}"
    retraction = CMap(f"retract_{space.name}", space, core, collapse)
    inclusion = CMap(f"incl_{space.name}", core, space,
                     (space.index(p) for p in core.points))
    steps = [CMap.identity(space)]
    for k, assign in enumerate(stage_maps, start=1):
        steps.append(CMap(f"collapse{k}", space, space, assign))
    return CoreResult(core, inclusion, retraction, Fence(steps))
