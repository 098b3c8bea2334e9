"""Probability measures p(dx) over kernel parameters"""
from __future__ import annotations

# Built-in
from dataclasses import dataclass
from typing import Any, Iterable, Literal, Sequence

# Third-Party
import numpy as np
from scipy import stats

__all__: tuple[str, ...] = ("MixingMeasure",)

WEIGHT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MixingMeasure:
    """
    A finitely supported mixing measure p(dx) = sum_i w_i delta_{x_i}.

    Dirac reduces a mixed moving average to a plain moving average, Discrete holds genuine atoms, and
    Quadrature holds nodes that approximate a density.

    ### Arguments
    - kind (str): "dirac", "discrete" or "quadrature"
    - nodes (tuple[tuple[float, ...], ...]): Parameter points x_i, all of dimension k
    - weights (tuple[float, ...]): Strictly positive weights summing to 1

    ### Returns
    - None
    """

    kind: Literal["dirac", "discrete", "quadrature"]
    nodes: tuple[tuple[float, ...], ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        nodes = tuple(tuple(float(value) for value in node) for node in self.nodes)
        weights = tuple(float(value) for value in self.weights)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

        if self.kind not in ("dirac", "discrete", "quadrature"):
            raise ValueError(f"unknown mixing kind {self.kind!r}")
        if not nodes or len(nodes) != len(weights):
            raise ValueError("a mixing measure needs as many weights as nodes, and at least one")
        if len({len(node) for node in nodes}) != 1:
            raise ValueError("all mixing nodes must have the same dimension")
        if any(not np.isfinite(value) for node in nodes for value in node):
            raise ValueError("mixing nodes must be finite")
        if any(not weight > 0 for weight in weights):
            raise ValueError("mixing weights must be strictly positive")
        if abs(sum(weights) - 1.0) > WEIGHT_TOLERANCE:
            raise ValueError(f"mixing weights must sum to 1, got {sum(weights)!r}")
        if self.kind == "dirac" and len(nodes) != 1:
            raise ValueError("a Dirac mixing measure has exactly one atom")

    @classmethod
    def dirac(cls, atom: Sequence[float] = ()) -> MixingMeasure:
        return cls("dirac", (tuple(atom),), (1.0,))

    @classmethod
    def discrete(cls, atoms: Iterable[tuple[Sequence[float], float]]) -> MixingMeasure:
        atoms = list(atoms)
        return cls("discrete", tuple(tuple(x) for x, _ in atoms), tuple(w for _, w in atoms))

    @classmethod
    def quadrature(cls, nodes: Iterable[tuple[Sequence[float], float]]) -> MixingMeasure:
        nodes = list(nodes)
        return cls("quadrature", tuple(tuple(x) for x, _ in nodes), tuple(w for _, w in nodes))

    @classmethod
    def from_distribution(cls, name: str, params: dict[str, float], nodes: int) -> MixingMeasure:
        """
        Equal-weight quantile-midpoint quadrature of a one-dimensional scipy.stats law.

        ### Arguments
        - name (str): A continuous distribution in scipy.stats, e.g. "gamma"
        - params (dict[str, float]): Its shape/loc/scale keywords
        - nodes (int): Number of quadrature nodes

        ### Returns
        - MixingMeasure: A quadrature measure
        """
        if nodes < 1:
            raise ValueError("at least one quadrature node is required")
        law = getattr(stats, name, None)
        if not isinstance(law, stats.rv_continuous):
            raise ValueError(f"{name!r} is not a continuous scipy.stats distribution")
        points = law(**params).ppf((np.arange(nodes) + 0.5) / nodes)
        if not np.all(np.isfinite(points)):
            raise ValueError(f"{name} quantiles are not finite for {params}")
        weights = np.full(nodes, 1.0 / nodes)
        weights[-1] = 1.0 - weights[:-1].sum()
        return cls("quadrature", tuple((float(x),) for x in points), tuple(weights))

    @property
    def dimension(self) -> int:
        return len(self.nodes[0])

    def __len__(self) -> int:
        return len(self.nodes)

    def points(self) -> np.ndarray:
        """Nodes as an array of shape (n, k)"""
        return np.asarray(self.nodes, dtype=float).reshape(len(self.nodes), self.dimension)

    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "atoms": [{"x": list(node), "weight": weight} for node, weight in zip(self.nodes, self.weights)],
        }
