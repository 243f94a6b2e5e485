"""Two-sided estimation of the free norm over absolute-sum generators.

Lower bounds come from certified contractive operators into semiprime
diagonal f-algebras: every such operator extends to a contractive
lattice-algebra homomorphism, so the sup norm of the evaluated image never
exceeds the free norm.  Candidates are drawn from three sources:

* single-atom sign operators (weight 1, columns +-1), which attain the
  analytic optimum on simple terms;
* discretized cylinder generators, one operator per mesh parameter;
* a seeded best-so-far random search with coordinate-wise resampling.

Upper bounds evaluate the polynomial majorant at the generator norms.  For
product-free terms a second lower bound is available from tuples of
functionals with column-wise feasibility (the lattice-part norm).

Estimates are reported as sandwiches; neither side is claimed to be the
norm except where both meet.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .cylinder import CylinderGrid, generator
from .discretize import atomize, build_partition, discrete_weight, discretize_function
from .expr import Expr, contains_product, desugar, eval_pointwise, variables
from .models import DiagonalAlgebra
from .rewrite import Polynomial, polynomial_majorant

__all__ = [
    "OperatorIntoAlgebra", "NormSandwich", "SearchConfig",
    "operator_lower_bound", "majorant_upper_bound", "norm_sandwich",
    "product_free_lower_bound", "evaluate_operator", "ContractionError",
]


class ContractionError(RuntimeError):
    """Internal guard: a search candidate lost its contraction certificate."""


@dataclass(eq=False)
class OperatorIntoAlgebra:
    """Images of the coordinate basis in a diagonal algebra.

    ``columns[i]`` is the image of the i-th basis vector.  For an
    absolute-sum domain the operator norm is the max column sup norm; the
    certificate requires it to be at most 1.
    """

    algebra: DiagonalAlgebra
    columns: np.ndarray  # shape (n, atoms)

    def __post_init__(self):
        self.columns = np.asarray(self.columns, dtype=float)
        if self.columns.ndim != 2 or self.columns.shape[1] != self.algebra.size:
            raise ValueError("columns must be (n, atoms) for the target algebra")

    @property
    def domain_dimension(self) -> int:
        return self.columns.shape[0]

    def operator_norm(self) -> float:
        return float(np.max(np.abs(self.columns), initial=0.0))

    def certify(self, tol: float = 1e-9) -> None:
        norm = self.operator_norm()
        if norm > 1.0 + tol:
            raise ContractionError(f"operator norm {norm} exceeds 1")

    def apply(self, x: Sequence[float]):
        vec = np.asarray(x, dtype=float)
        if vec.shape != (self.domain_dimension,):
            raise ValueError(f"expected a vector of dimension {self.domain_dimension}")
        return self.algebra.element(vec @ self.columns)

    def to_json(self) -> dict:
        return {"weights": self.algebra.weights.tolist(),
                "columns": self.columns.tolist()}


def evaluate_operator(e: Expr, gens: Mapping[str, Sequence[float]],
                      op: OperatorIntoAlgebra) -> float:
    """Sup norm of the term evaluated through the (certified) operator."""
    op.certify()
    assignment = {}
    for name in variables(e):
        if name not in gens:
            raise ValueError(f"no generator vector for variable {name!r}")
        assignment[name] = op.apply(gens[name])
    return op.algebra.evaluate(e, assignment).sup_norm()


@dataclass
class SearchConfig:
    search_iters: int = 10_000
    delta_list: tuple[float, ...] = (2.0 ** -5, 2.0 ** -6, 2.0 ** -7)
    seed: int = 0
    max_atoms: int = 8
    r_levels: int = 17
    face_points: int = 6
    sign_pattern_cap: int = 1024


def _gen_dimension(gens: Mapping[str, Sequence[float]]) -> int:
    dims = {np.asarray(v, dtype=float).shape[0] for v in gens.values()}
    if not dims:
        return 1  # no free variables; any domain works
    if len(dims) != 1:
        raise ValueError("all generator vectors must share one dimension")
    return dims.pop()


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng([seed % 2**32, *key])


def _sign_operators(n: int, cap: int, seed: int):
    """Single-atom operators with weight 1 and +-1 columns."""
    if 2 ** n <= cap:
        patterns = ((i >> np.arange(n)) & 1 for i in range(2 ** n))
        rows = [2.0 * np.asarray(bits, dtype=float) - 1.0 for bits in patterns]
    else:
        rng = _rng(seed, 41)
        rows = list(rng.choice([-1.0, 1.0], size=(cap, n)))
    algebra = DiagonalAlgebra([1.0])
    for row in rows:
        yield OperatorIntoAlgebra(algebra, row.reshape(n, 1))


def discretized_operator(n: int, delta: float, r_levels: int = 17,
                         face_points: int = 6) -> OperatorIntoAlgebra:
    """Operator built by discretizing the scaled cylinder generators.

    Basis images are the level-set discretizations of the generators scaled
    by ``1/(1 + delta)``; the weight function is the radial coordinate.
    """
    grid = CylinderGrid.regular(n, r_levels=r_levels, face_points=face_points)
    scale = 1.0 / (1.0 + delta)
    splits = []
    for i in range(n):
        basis = np.zeros(n)
        basis[i] = 1.0
        values = scale * generator(basis, grid).values
        splits.append((np.maximum(values, 0.0), np.maximum(-values, 0.0)))
    w = np.broadcast_to(grid.r_levels[:, None], grid.shape)
    partition = build_partition(delta)
    flat = [part for pair in splits for part in pair]
    atoms = atomize(flat, w, partition)
    weights = discrete_weight(w, atoms, partition)
    columns = []
    for pos, neg in splits:
        pos_d = discretize_function(pos, atoms, partition)
        neg_d = discretize_function(neg, atoms, partition)
        columns.append(pos_d - neg_d)
    op = OperatorIntoAlgebra(DiagonalAlgebra(weights), np.stack(columns))
    op.certify()
    return op


def _random_operator(rng: np.random.Generator, n: int, max_atoms: int) -> OperatorIntoAlgebra:
    atoms = int(rng.integers(1, max_atoms + 1))
    weights = 1.0 - rng.random(atoms)  # (0, 1]
    columns = rng.uniform(-1.0, 1.0, (n, atoms))
    return OperatorIntoAlgebra(DiagonalAlgebra(weights), columns)


def _mutate_operator(rng: np.random.Generator, op: OperatorIntoAlgebra) -> OperatorIntoAlgebra:
    weights = op.algebra.weights.copy()
    columns = op.columns.copy()
    n, atoms = columns.shape
    slot = int(rng.integers(0, atoms + n * atoms))
    if slot < atoms:
        weights[slot] = 1.0 - rng.random()
    else:
        slot -= atoms
        columns[slot // atoms, slot % atoms] = rng.uniform(-1.0, 1.0)
    return OperatorIntoAlgebra(DiagonalAlgebra(weights), columns)


def operator_lower_bound(e: Expr, gens: Mapping[str, Sequence[float]],
                         config: SearchConfig | None = None) -> tuple[float, OperatorIntoAlgebra]:
    """Best certified lower bound for the free norm of ``e`` along ``gens``.

    Deterministic under the seed; the per-iteration randomness is derived
    from (seed, iteration), so enlarging the budget or the mesh list never
    decreases the result.
    """
    config = config or SearchConfig()
    core = desugar(e)
    n = _gen_dimension(gens)

    best_value = -1.0
    best_op: OperatorIntoAlgebra | None = None

    def consider(op: OperatorIntoAlgebra) -> None:
        nonlocal best_value, best_op
        value = evaluate_operator(core, gens, op)
        if value > best_value:
            best_value, best_op = value, op

    for op in _sign_operators(n, config.sign_pattern_cap, config.seed):
        consider(op)
    for delta in config.delta_list:
        consider(discretized_operator(n, delta, config.r_levels, config.face_points))
    for iteration in range(config.search_iters):
        rng = _rng(config.seed, 42, iteration)
        if best_op is None or iteration % 5 == 0:
            consider(_random_operator(rng, n, config.max_atoms))
        else:
            consider(_mutate_operator(rng, best_op))

    assert best_op is not None
    return best_value, best_op


def majorant_upper_bound(e: Expr, gen_norms: Mapping[str, float]) -> float:
    """Majorant polynomial evaluated at the generator norms."""
    majorant = polynomial_majorant(e)
    return float(majorant.evaluate({k: float(v) for k, v in gen_norms.items()}))


@dataclass
class NormSandwich:
    lower: float
    upper: float
    witness: OperatorIntoAlgebra
    majorant: Polynomial

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper,
                "witness": self.witness.to_json(),
                "majorant": [{"monomial": list(m), "coeff": c}
                             for m, c in self.majorant.sorted_terms()]}


def norm_sandwich(e: Expr, gens: Mapping[str, Sequence[float]],
                  config: SearchConfig | None = None) -> NormSandwich:
    """Certified lower bound and majorant upper bound for the free norm."""
    lower, witness = operator_lower_bound(e, gens, config)
    norms = {name: float(np.sum(np.abs(np.asarray(vec, dtype=float))))
             for name, vec in gens.items()}
    upper = majorant_upper_bound(e, norms)
    if lower > upper + 1e-12 * (1.0 + upper):
        raise ContractionError(
            f"soundness violation: lower bound {lower} exceeds upper bound {upper}")
    return NormSandwich(lower, upper, witness, polynomial_majorant(e))


# ---------------------------------------------------------------------------
# Lattice-part lower bound (product-free terms)

def _project_feasible(tuples: np.ndarray) -> np.ndarray:
    """Scale columns so that ``sum_i |X[i, j]| <= 1`` for every j."""
    sums = np.sum(np.abs(tuples), axis=0)
    return tuples / np.maximum(sums, 1.0)


def _tuple_value(core: Expr, gens: Mapping[str, Sequence[float]],
                 tuples: np.ndarray) -> float:
    env = {}
    for name in variables(core):
        if name not in gens:
            raise ValueError(f"no generator vector for variable {name!r}")
        env[name] = tuples @ np.asarray(gens[name], dtype=float)
    vals = np.broadcast_to(np.asarray(eval_pointwise(core, env), dtype=float),
                           (tuples.shape[0],))
    return float(np.sum(np.abs(vals)))


def product_free_lower_bound(e: Expr, gens: Mapping[str, Sequence[float]],
                             tuple_size: int = 2, iters: int = 2000,
                             seed: int = 0) -> float:
    """Lower bound for the norm of a product-free term.

    Maximizes ``sum_i |e(x*_i ...)|`` over tuples of functionals subject to
    the column-wise feasibility ``max_j sum_i |x*_i(b_j)| <= 1`` (projected
    random search seeded with basis-functional tuples and cube corners).
    """
    core = desugar(e)
    if contains_product(core):
        raise ValueError("the lattice-part bound applies to product-free terms only")
    n = _gen_dimension(gens)
    k = tuple_size
    if k < 1:
        raise ValueError("tuple_size must be >= 1")

    best = 0.0

    def consider(tuples: np.ndarray) -> float:
        nonlocal best
        value = _tuple_value(core, gens, tuples)
        if value > best:
            best = value
        return value

    identity = np.zeros((k, n))
    for i in range(min(k, n)):
        identity[i, i] = 1.0
    consider(identity)
    corner_count = 2 ** n if 2 ** n <= 1024 else 1024
    if 2 ** n <= 1024:
        corners = (2.0 * ((i >> np.arange(n)) & 1) - 1.0 for i in range(corner_count))
    else:
        corners = iter(_rng(seed, 51).choice([-1.0, 1.0], size=(corner_count, n)))
    for corner in corners:
        tuples = np.zeros((k, n))
        tuples[0] = corner
        consider(tuples)

    best_tuples = identity
    for iteration in range(iters):
        rng = _rng(seed, 52, iteration)
        if iteration % 3 == 0:
            candidate = _project_feasible(rng.uniform(-1.0, 1.0, (k, n)))
        else:
            candidate = best_tuples.copy()
            candidate[rng.integers(0, k), rng.integers(0, n)] = rng.uniform(-1.0, 1.0)
            candidate = _project_feasible(candidate)
        if consider(candidate) == best:
            best_tuples = candidate
    return best
