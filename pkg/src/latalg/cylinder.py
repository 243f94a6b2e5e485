"""Weighted function model on the cylinder [0,1] x S, S the max-norm sphere.

Continuous functions on the cylinder, ordered pointwise and multiplied by

    (f * g)(r, u) = r f(r, u) g(r, u),

form a Banach f-algebra under the sup norm; the canonical generators are
``(r, u) -> u . x``.  This module samples that model on finite grids: the
sphere is gridded per cube face, the radial coordinate by explicit levels.
The extension of a term along generators divides out one power of r, with
the r = 0 row computed symbolically through the product-kill transform
(avoiding 0/0 and matching the radial limit exactly).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .expr import Expr, desugar, eval_pointwise, variables
from .rewrite import product_kill

__all__ = [
    "CylinderGrid", "StarFunction", "star_product", "generator", "constant_one",
    "cylinder_extension", "strong_unit_candidate", "UnitCandidate", "unit_norm",
    "check_star_axioms", "StarAxiomReport", "transport_to_cube", "CubeTransport",
]


@dataclass(frozen=True, eq=False)
class CylinderGrid:
    """Finite sampling of [0,1] x S: radial levels times sphere points.

    ``r_levels`` must contain 0 and 1.  ``sphere_points`` are rows with
    max-coordinate magnitude exactly 1 for cube grids; transported samples
    of another dual sphere may be stored unvalidated (see
    :func:`transport_to_cube`).
    """

    r_levels: np.ndarray
    sphere_points: np.ndarray

    @property
    def dimension(self) -> int:
        return self.sphere_points.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.r_levels.shape[0], self.sphere_points.shape[0])

    @property
    def size(self) -> int:
        return self.r_levels.shape[0] * self.sphere_points.shape[0]

    @classmethod
    def from_points(cls, r_levels, sphere_points, validate: bool = True) -> "CylinderGrid":
        r = np.asarray(r_levels, dtype=float)
        pts = np.asarray(sphere_points, dtype=float)
        if r.ndim != 1 or pts.ndim != 2:
            raise ValueError("r_levels must be a vector, sphere_points a matrix")
        if 0.0 not in r or 1.0 not in r:
            raise ValueError("r_levels must contain 0 and 1")
        if validate and pts.size and np.any(np.max(np.abs(pts), axis=1) != 1.0):
            raise ValueError("sphere points must have max-coordinate magnitude exactly 1")
        return cls(r, pts)

    @classmethod
    def regular(cls, dimension: int, r_levels: int = 33, face_points: int = 8) -> "CylinderGrid":
        """Uniform grid: per-face lattices on the 2n cube faces, shared edge
        points deduplicated in canonical face order (axis 0 +, axis 0 -, ...)."""
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        if r_levels < 2 or face_points < 2:
            raise ValueError("need at least two radial levels and two points per face axis")
        r = np.linspace(0.0, 1.0, r_levels)
        seen: set[tuple] = set()
        rows: list[tuple] = []
        axis = np.linspace(-1.0, 1.0, face_points)
        for i in range(dimension):
            for sign in (1.0, -1.0):
                if dimension == 1:
                    face = np.array([[sign]])
                else:
                    mesh = np.meshgrid(*([axis] * (dimension - 1)), indexing="ij")
                    free = np.stack(mesh, axis=-1).reshape(-1, dimension - 1)
                    face = np.insert(free, i, sign, axis=1)
                for row in face:
                    key = tuple(row)
                    if key not in seen:
                        seen.add(key)
                        rows.append(key)
        return cls.from_points(r, np.array(rows))


@dataclass(eq=False)
class StarFunction:
    """Values over the cylinder grid, indexed (radial level, sphere point)."""

    grid: CylinderGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values must have shape {self.grid.shape}")

    def sup(self) -> float:
        return float(np.max(np.abs(self.values), initial=0.0))

    def _like(self, values) -> "StarFunction":
        return StarFunction(self.grid, values)

    def _check(self, other: "StarFunction") -> None:
        if other.grid is not self.grid:
            raise ValueError("star functions live on different grids")

    def __add__(self, other):
        self._check(other)
        return self._like(self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return self._like(self.values - other.values)

    def __mul__(self, scalar: float):
        return self._like(float(scalar) * self.values)

    __rmul__ = __mul__

    def __abs__(self):
        return self._like(np.abs(self.values))

    def join(self, other):
        self._check(other)
        return self._like(np.maximum(self.values, other.values))

    def meet(self, other):
        self._check(other)
        return self._like(np.minimum(self.values, other.values))

    def to_csv(self, path) -> None:
        n = self.grid.dimension
        nr, ns = self.grid.shape
        r = np.repeat(self.grid.r_levels, ns)
        u = np.tile(self.grid.sphere_points, (nr, 1))
        header = "r," + ",".join(f"u{i + 1}" for i in range(n)) + ",value"
        table = np.column_stack([r, u, self.values.reshape(-1)])
        np.savetxt(path, table, delimiter=",", header=header, comments="")


def star_product(f: StarFunction, g: StarFunction) -> StarFunction:
    """Weighted pointwise product ``(r, u) -> r f g``."""
    f._check(g)
    r = f.grid.r_levels[:, None]
    return StarFunction(f.grid, r * f.values * g.values)


def generator(x: Sequence[float], grid: CylinderGrid) -> StarFunction:
    """Canonical generator ``(r, u) -> u . x`` (independent of r)."""
    vec = np.asarray(x, dtype=float)
    if vec.shape != (grid.dimension,):
        raise ValueError(f"expected a vector of dimension {grid.dimension}")
    row = grid.sphere_points @ vec
    return StarFunction(grid, np.tile(row, (grid.r_levels.shape[0], 1)))


def constant_one(grid: CylinderGrid) -> StarFunction:
    return StarFunction(grid, np.ones(grid.shape))


def cylinder_extension(e: Expr, gens: Mapping[str, Sequence[float]],
                       grid: CylinderGrid) -> StarFunction:
    """Image of a term under the extension homomorphism along ``gens``.

    For r > 0 the value is the real evaluation at the functional ``r*u``
    divided by r; the r = 0 row is the product-killed term evaluated at
    ``u`` itself, which equals the radial limit.
    """
    core = desugar(e)
    names = variables(core)
    dots = {}
    for name in names:
        if name not in gens:
            raise ValueError(f"no generator vector for variable {name!r}")
        vec = np.asarray(gens[name], dtype=float)
        if vec.shape != (grid.dimension,):
            raise ValueError(f"generator for {name!r} must have dimension {grid.dimension}")
        dots[name] = grid.sphere_points @ vec

    r = grid.r_levels
    positive = r > 0.0
    out = np.zeros(grid.shape)
    if np.any(positive):
        r_pos = r[positive][:, None]
        env = {name: r_pos * row[None, :] for name, row in dots.items()}
        vals = np.broadcast_to(
            np.asarray(eval_pointwise(core, env), dtype=float),
            (int(np.sum(positive)), grid.shape[1]))
        out[positive] = vals / r_pos
    if np.any(~positive):
        killed = product_kill(core)
        vals0 = np.broadcast_to(
            np.asarray(eval_pointwise(killed, dots), dtype=float), (grid.shape[1],))
        out[~positive] = vals0
    return StarFunction(grid, out)


@dataclass
class UnitCandidate:
    function: StarFunction
    grid_min: float
    accepted: bool


def strong_unit_candidate(family: Sequence[Sequence[float]], grid: CylinderGrid) -> UnitCandidate:
    """Pointwise sup of |generators| over a family of unit vectors.

    The candidate is accepted when its grid minimum is at least 1/2, the
    threshold under which the sup fails to dominate the dual norm.
    """
    if len(family) == 0:
        raise ValueError("the family must be nonempty")
    sups = None
    for x in family:
        vec = np.asarray(x, dtype=float)
        if abs(float(np.sum(np.abs(vec))) - 1.0) > 1e-12:
            raise ValueError(f"family vectors must have absolute-sum norm 1, got {vec}")
        g = np.abs(generator(vec, grid).values)
        sups = g if sups is None else np.maximum(sups, g)
    grid_min = float(np.min(sups))
    return UnitCandidate(StarFunction(grid, sups), grid_min, grid_min >= 0.5)


def unit_norm(f: StarFunction, e_unit: StarFunction) -> float:
    """Order-unit norm: max of |f| / e_unit over the grid."""
    f._check(e_unit)
    if np.any(e_unit.values <= 0.0):
        raise ValueError("the unit must be strictly positive on the grid")
    return float(np.max(np.abs(f.values) / e_unit.values, initial=0.0))


@dataclass
class StarAxiomReport:
    trials: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def check_star_axioms(grid: CylinderGrid, trials: int = 100, seed: int = 0,
                      product: Callable[[StarFunction, StarFunction], StarFunction] = star_product,
                      tol: float = 1e-12) -> StarAxiomReport:
    """Verify the product laws on random samples.

    Checked per trial: commutativity, associativity, the disjointness-
    preservation law for positive multipliers, and constructive
    semiprimeness away from r = 0 (f*f = 0 at a point with r > 0 forces
    f = 0 there).  The weight row is pinned globally: 1*1 must equal r.
    """
    rng = np.random.default_rng([seed % 2**32, 21])
    report = StarAxiomReport(trials, [])
    one = constant_one(grid)
    weight = product(one, one)
    expected = np.broadcast_to(grid.r_levels[:, None], grid.shape)
    if np.max(np.abs(weight.values - expected)) > tol:
        report.violations.append({"law": "unit_weight_row",
                                  "residual": float(np.max(np.abs(weight.values - expected)))})

    r_positive = grid.r_levels[:, None] > 0.0
    for trial in range(trials):
        f = StarFunction(grid, rng.uniform(-1, 1, grid.shape))
        g = StarFunction(grid, rng.uniform(-1, 1, grid.shape))
        h = StarFunction(grid, rng.uniform(-1, 1, grid.shape))

        comm = np.max(np.abs(product(f, g).values - product(g, f).values))
        if comm > tol:
            report.violations.append({"law": "commutativity", "trial": trial,
                                      "residual": float(comm)})
        assoc = np.max(np.abs(product(product(f, g), h).values
                              - product(f, product(g, h)).values))
        if assoc > tol:
            report.violations.append({"law": "associativity", "trial": trial,
                                      "residual": float(assoc)})

        mask = rng.integers(0, 2, grid.shape).astype(float)
        x = StarFunction(grid, np.abs(rng.uniform(-1, 1, grid.shape)) * mask)
        y = StarFunction(grid, np.abs(rng.uniform(-1, 1, grid.shape)) * (1.0 - mask))
        z = StarFunction(grid, np.abs(rng.uniform(-1, 1, grid.shape)))
        disj = np.max(np.minimum(product(z, x).values, y.values))
        if disj > tol:
            report.violations.append({"law": "f_algebra_condition", "trial": trial,
                                      "residual": float(disj)})

        square = product(f, f)
        bad = r_positive & (square.values == 0.0) & (f.values != 0.0)
        if np.any(bad):
            report.violations.append({"law": "semiprime_positive_r", "trial": trial,
                                      "points": int(np.sum(bad))})
    return report


@dataclass
class CubeTransport:
    """Composition operator between a sampled dual sphere and the cube sphere.

    ``pull`` rewrites a function on the cube grid as a function on the
    source samples via ``u -> u / max|u|``; the identification is pointwise,
    so lattice operations and the weighted product transport exactly.
    """

    source_grid: CylinderGrid
    target_grid: CylinderGrid

    def pull(self, f: StarFunction) -> StarFunction:
        if f.grid is not self.target_grid:
            raise ValueError("function does not live on the transported cube grid")
        return StarFunction(self.source_grid, f.values.copy())


def transport_to_cube(sphere_points, r_levels=None) -> CubeTransport:
    """Build the cube transport for samples of a finite-dimensional dual sphere.

    Every sample is normalized by its max-coordinate magnitude; zero vectors
    are rejected.  On cube samples the transport is the identity.
    """
    pts = np.asarray(sphere_points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("need a nonempty matrix of sphere samples")
    norms = np.max(np.abs(pts), axis=1)
    if np.any(norms == 0.0):
        raise ValueError("zero vector is not a sphere point")
    cube = pts / norms[:, None]
    r = np.linspace(0.0, 1.0, 33) if r_levels is None else np.asarray(r_levels, dtype=float)
    source = CylinderGrid.from_points(r, pts, validate=False)
    target = CylinderGrid.from_points(r, cube, validate=True)
    return CubeTransport(source, target)
