"""The invariant family, each one a distance computation over a built space.

Values follow the unnormalized convention throughout: 1 means contractible
(for cat) or trivially plannable (for the TC family).  Every operation
returns the bare integer; the ``*_witnessed`` variant returns the full
DistanceResult when the cover and fences are wanted.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

from homdist.distance import DistanceResult, higher_distance
from homdist.finspace import (BudgetError, CMap, FiniteSpace, MapError,
                              SpaceError, product, subspace)

DEFAULT_BUDGET = 25
DEFAULT_MAX_ARITY = 3


class FiberWarning(UserWarning):
    """A parametrised computation ran on a map with disconnected fibers."""


def _require_connected(space: FiniteSpace, role: str):
    if not space.is_path_connected():
        raise SpaceError(f"{role} {space.name} is not path-connected")


def _check_arity(n: int, max_arity: int):
    if n < 1:
        raise ValueError("arity must be positive")
    if n > max_arity:
        raise BudgetError(f"arity {n} exceeds the cap {max_arity}")


def _check_budget(size: int, budget: int, what: str):
    if size > budget:
        raise BudgetError(f"{what} has {size} points, over the budget {budget}")


def _tuple_subspace(base: FiniteSpace, n: int, tuples, name: str):
    """Poset on n-tuples over ``base`` (componentwise order) plus the n
    coordinate projections.  Equals the subspace of the n-fold power without
    materializing the power."""
    seen = {}
    for t in tuples:
        t = tuple(t)
        if len(t) != n:
            raise SpaceError(f"{name}: expected {n}-tuples")
        key = tuple(base.index(c) for c in t)
        seen[key] = t
    if not seen:
        raise SpaceError(f"{name}: empty subspace rejected")
    ranked = sorted(seen)    # row-major: same order the full power would use
    pts = [seen[k] for k in ranked]
    down = []
    for key in ranked:
        m = 0
        for j, other in enumerate(ranked):
            if all(base.leq_idx(o, k) for o, k in zip(other, key)):
                m |= 1 << j
        down.append(m)
    space = FiniteSpace(name, pts, down)
    projections = [CMap(f"axis{i + 1}", space, base, (k[i] for k in ranked))
                   for i in range(n)]
    return space, projections


def _power_projections(space: FiniteSpace, n: int):
    power = product([space] * n)
    if n == 1:
        return power, [CMap.identity(space)]
    projections = [CMap(f"axis{i + 1}", power, space,
                        (space.index(pt[i]) for pt in power.points))
                   for i in range(n)]
    return power, projections


# -- LS-category -------------------------------------------------------

def cat_witnessed(space: FiniteSpace, basepoint=None, *,
                  budget: int = DEFAULT_BUDGET) -> DistanceResult:
    """Distance between the two axis inclusions x -> (x, x') and x -> (x', x)."""
    _require_connected(space, "space")
    _check_budget(len(space.points), budget, space.name)
    base = space.points[0] if basepoint is None else basepoint
    bi = space.index(base)
    square = product([space, space])
    k = len(space.points)
    via_first = CMap("axis_incl_1", space, square,
                     (i * k + bi for i in range(k)))
    via_second = CMap("axis_incl_2", space, square,
                      (bi * k + i for i in range(k)))
    return higher_distance([via_first, via_second])


def cat(space: FiniteSpace, basepoint=None, *, budget: int = DEFAULT_BUDGET) -> int:
    return cat_witnessed(space, basepoint, budget=budget).value


def cat_from_identity(space: FiniteSpace, basepoint=None, *,
                      budget: int = DEFAULT_BUDGET) -> int:
    """The identity-vs-constant variant; agreement with cat() is a report-mode
    check, never assumed."""
    _require_connected(space, "space")
    _check_budget(len(space.points), budget, space.name)
    base = space.points[0] if basepoint is None else basepoint
    ident = CMap.identity(space)
    const = CMap.constant(space, space, base)
    return higher_distance([ident, const]).value


# -- topological complexity --------------------------------------------

def tc_n_witnessed(space: FiniteSpace, n: int, *, budget: int = DEFAULT_BUDGET,
                   max_arity: int = DEFAULT_MAX_ARITY) -> DistanceResult:
    """Distance of the n coordinate projections of the n-fold power."""
    _check_arity(n, max_arity)
    _require_connected(space, "space")
    _check_budget(len(space.points) ** n, budget, f"{space.name}^{n}")
    _, projections = _power_projections(space, n)
    return higher_distance(projections)


def tc_n(space: FiniteSpace, n: int, *, budget: int = DEFAULT_BUDGET,
         max_arity: int = DEFAULT_MAX_ARITY) -> int:
    return tc_n_witnessed(space, n, budget=budget, max_arity=max_arity).value


def rel_tc_witnessed(space: FiniteSpace, n: int, members, *,
                     budget: int = DEFAULT_BUDGET,
                     max_arity: int = DEFAULT_MAX_ARITY) -> DistanceResult:
    """Distance of the projections restricted to a subspace of the power.

    ``members`` lists n-tuples of points (plain points when n is 1).
    """
    _check_arity(n, max_arity)
    members = list(members)
    if not members:
        raise SpaceError("empty subspace rejected")
    if n == 1:
        sub, _ = subspace(space, members)
        return higher_distance([CMap("axis1", sub, space,
                                     (space.index(p) for p in sub.points))])
    sub, projections = _tuple_subspace(space, n, members,
                                       f"{space.name}^{n}_sub")
    _check_budget(len(sub.points), budget, sub.name)
    return higher_distance(projections)


def rel_tc(space: FiniteSpace, n: int, members, *, budget: int = DEFAULT_BUDGET,
           max_arity: int = DEFAULT_MAX_ARITY) -> int:
    return rel_tc_witnessed(space, n, members, budget=budget,
                            max_arity=max_arity).value


def pair_tc_witnessed(space: FiniteSpace, members, n: int, *,
                      budget: int = DEFAULT_BUDGET,
                      max_arity: int = DEFAULT_MAX_ARITY) -> DistanceResult:
    """Relative distance over space x members^(n-1); 1 at n = 1 by convention."""
    _check_arity(n, max_arity)
    members = list(dict.fromkeys(members))
    if not members:
        raise SpaceError("empty subspace rejected")
    for p in members:
        space.index(p)
    _require_connected(space, "space")
    if n == 1:
        return higher_distance([CMap.identity(space)])
    tuples = itertools.product(space.points, *([members] * (n - 1)))
    sub, projections = _tuple_subspace(space, n, tuples,
                                       f"{space.name}x{n - 1}fold_sub")
    _check_budget(len(sub.points), budget, sub.name)
    return higher_distance(projections)


def pair_tc(space: FiniteSpace, members, n: int, *, budget: int = DEFAULT_BUDGET,
            max_arity: int = DEFAULT_MAX_ARITY) -> int:
    return pair_tc_witnessed(space, members, n, budget=budget,
                             max_arity=max_arity).value


def map_tc_witnessed(q: CMap, n: int, *, budget: int = DEFAULT_BUDGET,
                     max_arity: int = DEFAULT_MAX_ARITY) -> DistanceResult:
    """Distance of the n composites of q with the power projections."""
    _check_arity(n, max_arity)
    if not q.is_surjective():
        raise MapError(f"{q.name} is not surjective")
    _require_connected(q.source, "total space")
    _require_connected(q.target, "base space")
    _check_budget(len(q.source.points) ** n, budget, f"{q.source.name}^{n}")
    _, projections = _power_projections(q.source, n)
    return higher_distance([q.after(p) for p in projections])


def map_tc(q: CMap, n: int, *, budget: int = DEFAULT_BUDGET,
           max_arity: int = DEFAULT_MAX_ARITY) -> int:
    return map_tc_witnessed(q, n, budget=budget, max_arity=max_arity).value


# -- parametrised ------------------------------------------------------

@dataclass(frozen=True)
class FiberedPower:
    """n-tuples of total-space points lying in one fiber, with projections."""

    base_map: CMap
    arity: int
    space: FiniteSpace
    projections: tuple[CMap, ...]


def fibered_power(q: CMap, n: int) -> FiberedPower:
    if n < 1:
        raise ValueError("arity must be positive")
    total = q.source
    if n == 1:
        return FiberedPower(q, 1, total, (CMap.identity(total),))
    fibers: dict[int, list] = {}
    for p, v in zip(total.points, q.assign):
        fibers.setdefault(v, []).append(p)
    tuples = []
    for v in sorted(fibers):
        tuples.extend(itertools.product(fibers[v], repeat=n))
    space, projections = _tuple_subspace(total, n, tuples,
                                         f"{total.name}_fib{n}")
    return FiberedPower(q, n, space, tuple(projections))


def param_tc_witnessed(q: CMap, n: int, *, budget: int = DEFAULT_BUDGET,
                       max_arity: int = DEFAULT_MAX_ARITY) -> DistanceResult:
    """Distance of the projections of the n-fold fibered power."""
    _check_arity(n, max_arity)
    if not q.is_surjective():
        raise MapError(f"{q.name} is not surjective")
    for block, pts in _fiber_blocks(q).items():
        sub, _ = subspace(q.source, pts)
        if not sub.is_path_connected():
            warnings.warn(
                f"{q.name}: fiber over {q.target.points[block]!r} is not "
                "path-connected; value computed anyway", FiberWarning,
                stacklevel=2)
            break
    power = fibered_power(q, n)
    _check_budget(len(power.space.points), budget, power.space.name)
    return higher_distance(power.projections)


def param_tc(q: CMap, n: int, *, budget: int = DEFAULT_BUDGET,
             max_arity: int = DEFAULT_MAX_ARITY) -> int:
    return param_tc_witnessed(q, n, budget=budget, max_arity=max_arity).value


def _fiber_blocks(q: CMap) -> dict[int, list]:
    blocks: dict[int, list] = {}
    for p, v in zip(q.source.points, q.assign):
        blocks.setdefault(v, []).append(p)
    return blocks
