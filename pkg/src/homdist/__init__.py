"""Exact homotopic-distance invariants on finite T0 spaces."""

from homdist.finspace import (BudgetError, CMap, CoreResult, Fence, FiniteSpace,
                              MapError, OpenSet, ParseError, SpaceError,
                              core_reduce, homotopic, is_continuous, open_sets,
                              parse_map, parse_space, path_components, product,
                              subspace)
from homdist.distance import (DistanceResult, NoFiniteDistance, good_open_family,
                              higher_distance, min_cover, subspace_distance)

__version__ = "0.1.0"

__all__ = [
    "BudgetError", "CMap", "CoreResult", "DistanceResult", "Fence",
    "FiniteSpace", "MapError", "NoFiniteDistance", "OpenSet", "ParseError",
    "SpaceError", "core_reduce", "good_open_family", "higher_distance",
    "homotopic", "is_continuous", "min_cover", "open_sets", "parse_map",
    "parse_space", "path_components", "product", "subspace",
    "subspace_distance", "__version__",
]
