"""Graph states, their stabilizers, and the named six-vertex graphs."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import reduce
from typing import Iterable

import numpy as np

from .qalgebra import (
    HADAMARD,
    MAX_QUBITS,
    DimensionError,
    PauliString,
    PureState,
    cluster6,
    equal_up_to_phase,
)


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: frozenset[tuple[int, int]]

    def __init__(self, n_vertices: int, edges: Iterable[Iterable[int]] = ()):
        if n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        canon = set()
        for edge in edges:
            a, b = tuple(edge)
            if a == b:
                raise ValueError(f"self-loop on vertex {a}")
            if not (1 <= a <= n_vertices and 1 <= b <= n_vertices):
                raise ValueError(f"edge {(a, b)} outside vertices 1..{n_vertices}")
            e = (min(a, b), max(a, b))
            if e in canon:
                raise ValueError(f"duplicate edge {e}")
            canon.add(e)
        object.__setattr__(self, "n_vertices", int(n_vertices))
        object.__setattr__(self, "edges", frozenset(canon))

    def neighbors(self, v: int) -> set[int]:
        return {b if a == v else a for a, b in self.edges if v in (a, b)}

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def to_json(self) -> str:
        return json.dumps({"n": self.n_vertices, "edges": [list(e) for e in self.sorted_edges()]})

    @classmethod
    def from_json(cls, text: str | dict) -> Graph:
        data = json.loads(text) if isinstance(text, str) else text
        return cls(data["n"], data["edges"])


def graph_to_state(g: Graph) -> PureState:
    """|+>^n followed by a controlled-phase gate on every edge."""
    n = g.n_vertices
    if n > MAX_QUBITS:
        raise DimensionError(f"{n} vertices exceeds {MAX_QUBITS}")
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))) & 1
    parity = np.zeros(1 << n, dtype=int)
    for a, b in g.edges:
        parity ^= bits[:, a - 1] & bits[:, b - 1]
    amps = np.where(parity, -1.0, 1.0) / np.sqrt(1 << n)
    return PureState(amps)


@dataclass(frozen=True)
class StabilizerSet:
    generators: tuple[PauliString, ...]

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        sizes = {g.n_qubits for g in gens}
        if len(sizes) != 1:
            raise ValueError("generators act on different numbers of qubits")
        for a, b in itertools.combinations(gens, 2):
            if not a.commutes_with(b):
                raise ValueError(f"generators {a} and {b} anticommute")

    @property
    def n_qubits(self) -> int:
        return self.generators[0].n_qubits

    def __iter__(self):
        return iter(self.generators)

    def __len__(self):
        return len(self.generators)

    def joint_projector(self) -> np.ndarray:
        """Projector onto the joint +1 eigenspace."""
        dim = 1 << self.n_qubits
        eye = np.eye(dim)
        return reduce(np.matmul, [(g.matrix() + eye) / 2 for g in self.generators])

    def stabilized_dimension(self) -> int:
        return int(round(np.trace(self.joint_projector()).real))


def stabilizer_generators(g: Graph) -> StabilizerSet:
    """``X_v prod_{w in N(v)} Z_w`` for every vertex v."""
    gens = []
    for v in range(1, g.n_vertices + 1):
        letters = ["I"] * g.n_vertices
        letters[v - 1] = "X"
        for w in g.neighbors(v):
            letters[w - 1] = "Z"
        gens.append(PauliString("".join(letters)))
    return StabilizerSet(tuple(gens))


# Two jointly measurable triples of the cluster-state stabilizers: the first is
# diagonal in Z^3 X^3, the second in X^3 Z^3.
C6_ODD = (PauliString("ZZIIII"), PauliString("IZZIII"), PauliString("IIZXXX"))
C6_EVEN = (PauliString("XXXZII"), PauliString("IIIZZI"), PauliString("IIIIZZ"))


def stabilizers_of_c6() -> StabilizerSet:
    return StabilizerSet(C6_ODD + C6_EVEN)


def apply_hadamards(psi: PureState, qubits: Iterable[int]) -> PureState:
    n = psi.n_qubits
    t = psi.amplitudes.reshape((2,) * n)
    for q in sorted(set(qubits)):
        if not 1 <= q <= n:
            raise IndexError(f"qubit {q} outside 1..{n}")
        t = np.moveaxis(np.tensordot(HADAMARD, t, axes=([1], [q - 1])), 0, q - 1)
    return PureState(t.reshape(-1))


def lu_hadamard_equivalent(psi: PureState, g: Graph, hadamard_on: Iterable[int] = ()) -> bool:
    if psi.n_qubits != g.n_vertices:
        raise DimensionError(f"state has {psi.n_qubits} qubits, graph {g.n_vertices} vertices")
    return equal_up_to_phase(apply_hadamards(graph_to_state(g), hadamard_on), psi)


def search_graphs(psi: PureState, hadamard_on: Iterable[int]) -> list[Graph]:
    """All graphs whose state, after Hadamards on ``hadamard_on``, equals ``psi``."""
    n = psi.n_qubits
    hadamard_on = tuple(hadamard_on)
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    # undo the Hadamards once, then compare against bare graph states
    target = apply_hadamards(psi, hadamard_on)
    found = []
    for mask in range(1 << len(pairs)):
        edges = [p for i, p in enumerate(pairs) if mask >> i & 1]
        g = Graph(n, edges)
        if equal_up_to_phase(graph_to_state(g), target):
            found.append(g)
    return found


_NAMED = {
    "star6": [(1, 2), (1, 3), (1, 4), (1, 5), (1, 6)],
    "linear6": [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)],
    # convention: path 1-2-3-4-5 with a branch 3-6
    "y6": [(1, 2), (2, 3), (3, 4), (4, 5), (3, 6)],
    # found by search_graphs(cluster6(), {1, 3, 4, 6}); the match is unique
    "c6_graph": [(1, 2), (2, 3), (2, 5), (4, 5), (5, 6)],
}

C6_HADAMARDS = frozenset({1, 3, 4, 6})
GHZ_HADAMARDS = frozenset({2, 3, 4, 5, 6})


def named_graph(name: str) -> Graph:
    try:
        edges = _NAMED[name]
    except KeyError:
        raise KeyError(f"unknown graph {name!r}; choose from {sorted(_NAMED)}") from None
    return Graph(6, edges)


def graph_names() -> list[str]:
    return sorted(_NAMED)


def check_c6_graph() -> bool:
    return lu_hadamard_equivalent(cluster6(), named_graph("c6_graph"), C6_HADAMARDS)
