"""Influence network instances and their coupling matrices.

An instance is a weighted directed graph on n agents plus per-agent
stubbornness, initial opinions and a horizon.  Edge (i, j) with weight w_ij
means agent j influences agent i.  Agents are 0-based internally; scenario
files use 1-based indices.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from typing import Union

import numpy as np


@dataclass(frozen=True)
class InfluenceNetwork:
    """One opinion game instance.

    edges maps ordered index pairs (i, j) to the nonnegative weight with
    which agent j influences agent i; missing pairs mean weight zero.
    k is the stubbornness vector, x0 the initial opinions, T the horizon.
    """

    n: int
    edges: dict
    k: np.ndarray
    x0: np.ndarray
    T: float
    name: str = ""

    def __post_init__(self):
        k = np.array(self.k, dtype=float)
        x0 = np.array(self.x0, dtype=float)
        k.setflags(write=False)
        x0.setflags(write=False)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "edges", dict(self.edges))

    def neighbors(self, i):
        """Agents that influence agent i, sorted."""
        return sorted(j for (a, j) in self.edges if a == i)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    message: str

    def __str__(self):
        return f"{self.severity}: {self.message}"


@dataclass(frozen=True)
class CompleteUniform:
    """Every ordered pair is an edge with common weight w; common stubbornness k."""

    w: float
    k: float


@dataclass(frozen=True)
class SingleLeader:
    """Agent 1 has no in-edges; every other agent listens only to agent 1."""


@dataclass(frozen=True)
class General:
    """Anything else."""


Topology = Union[CompleteUniform, SingleLeader, General]


@dataclass(frozen=True)
class GameMatrices:
    """Coupling data assembled from a network.

    W is the Laplacian-like matrix: diagonal q_i = sum_j w_ij + k_i and
    off-diagonal entries -w_ij, so its rows sum to the stubbornness vector.
    k is that stubbornness vector, q the diagonal of W.
    """

    W: np.ndarray
    k: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        for name in ("W", "k", "q"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def validate(net: InfluenceNetwork) -> list[Diagnostic]:
    """Collect diagnostics; empty list means the instance is well formed.

    Opinions outside [0, 1] yield warnings only: the dynamics are affine and
    never clip, so the solver accepts them.
    """
    out = []
    if not isinstance(net.n, numbers.Integral) or net.n < 1:
        out.append(Diagnostic("error", f"agent count must be a positive integer, got {net.n!r}"))
        return out
    n = int(net.n)
    if net.k.shape != (n,):
        out.append(Diagnostic("error", f"k must have length {n}, got shape {net.k.shape}"))
    elif not np.all(np.isfinite(net.k)):
        out.append(Diagnostic("error", "k entries must be finite"))
    elif np.any(net.k < 0):
        bad = int(np.argmin(net.k))
        out.append(Diagnostic("error", f"negative stubbornness k[{bad + 1}] = {net.k[bad]}"))
    if net.x0.shape != (n,):
        out.append(Diagnostic("error", f"x0 must have length {n}, got shape {net.x0.shape}"))
    elif not np.all(np.isfinite(net.x0)):
        out.append(Diagnostic("error", "x0 entries must be finite"))
    if not (np.isfinite(net.T) and net.T > 0):
        out.append(Diagnostic("error", f"horizon T must be positive and finite, got {net.T}"))
    for (i, j), w in net.edges.items():
        tag = f"edge ({i + 1}, {j + 1})"
        if not (isinstance(i, numbers.Integral) and isinstance(j, numbers.Integral)):
            out.append(Diagnostic("error", f"{tag}: indices must be integers"))
            continue
        if not (0 <= i < n and 0 <= j < n):
            out.append(Diagnostic("error", f"{tag}: agent index out of range 1..{n}"))
            continue
        if i == j:
            out.append(Diagnostic("error", f"self-edge on agent {i + 1}"))
        if not np.isfinite(w) or w < 0:
            out.append(Diagnostic("error", f"{tag}: weight must be finite and >= 0, got {w}"))
    if net.x0.shape == (n,) and np.all(np.isfinite(net.x0)):
        low, high = float(np.min(net.x0)), float(np.max(net.x0))
        if low < 0.0 or high > 1.0:
            out.append(Diagnostic(
                "warning",
                f"initial opinions outside [0, 1] (range [{low:g}, {high:g}]); accepted as-is"))
    return out


def is_valid(net: InfluenceNetwork) -> bool:
    return not any(d.severity == "error" for d in validate(net))


def build_matrices(net: InfluenceNetwork) -> GameMatrices:
    """Assemble W (Laplacian-like), k and the diagonal q from a network."""
    errors = [d for d in validate(net) if d.severity == "error"]
    if errors:
        raise ValueError("invalid network: " + "; ".join(d.message for d in errors))
    n = int(net.n)
    W = np.zeros((n, n))
    for (i, j), w in net.edges.items():
        W[i, j] -= w
    q = -W.sum(axis=1) + net.k
    W[np.arange(n), np.arange(n)] = q
    return GameMatrices(W=W, k=net.k.copy(), q=q)


def classify_topology(net: InfluenceNetwork) -> Topology:
    """Dispatch tag for the closed-form trajectory families."""
    n = int(net.n)
    edges = net.edges
    if n == 1 and not edges:
        return CompleteUniform(w=0.0, k=float(net.k[0]))
    all_pairs = n * (n - 1)
    if len(edges) == all_pairs:
        weights = list(edges.values())
        w0 = weights[0]
        if all(w == w0 for w in weights) and np.ptp(net.k) == 0.0:
            return CompleteUniform(w=float(w0), k=float(net.k[0]))
    if n >= 2:
        want = {(i, 0) for i in range(1, n)}
        if set(edges) == want:
            return SingleLeader()
    return General()


_SCENARIO_KEYS = {"n", "T", "x0", "k", "edges", "name"}
_EDGE_KEYS = {"from", "to", "w"}


def network_from_dict(data: dict) -> InfluenceNetwork:
    """Build a network from the scenario schema (1-based edge indices).

    Unknown keys are rejected so that typos in scenario files surface
    instead of being silently ignored.
    """
    if not isinstance(data, dict):
        raise ValueError("scenario must be a JSON object")
    unknown = set(data) - _SCENARIO_KEYS
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    for key in ("n", "T", "x0", "k", "edges"):
        if key not in data:
            raise ValueError(f"scenario is missing required key {key!r}")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"'n' must be a positive integer, got {n!r}")
    for key in ("x0", "k"):
        seq = data[key]
        if not isinstance(seq, list) or len(seq) != n:
            raise ValueError(f"'{key}' must be a list of {n} numbers")
        if not all(isinstance(v, numbers.Real) and not isinstance(v, bool) for v in seq):
            raise ValueError(f"'{key}' entries must be numbers")
    if not isinstance(data["T"], numbers.Real) or isinstance(data["T"], bool):
        raise ValueError("'T' must be a number")
    edges = {}
    if not isinstance(data["edges"], list):
        raise ValueError("'edges' must be a list of edge objects")
    for entry in data["edges"]:
        if not isinstance(entry, dict):
            raise ValueError(f"edge entries must be objects, got {entry!r}")
        unknown = set(entry) - _EDGE_KEYS
        if unknown:
            raise ValueError(f"unknown edge keys: {sorted(unknown)}")
        for key in _EDGE_KEYS:
            if key not in entry:
                raise ValueError(f"edge is missing key {key!r}: {entry!r}")
        i, j, w = entry["from"], entry["to"], entry["w"]
        for label, idx in (("from", i), ("to", j)):
            if not isinstance(idx, int) or isinstance(idx, bool) or not (1 <= idx <= n):
                raise ValueError(f"edge index '{label}' must be an integer in 1..{n}, got {idx!r}")
        if not isinstance(w, numbers.Real) or isinstance(w, bool):
            raise ValueError(f"edge weight must be a number, got {w!r}")
        key = (i - 1, j - 1)
        if key in edges:
            raise ValueError(f"duplicate edge ({i}, {j})")
        edges[key] = float(w)
    name = data.get("name", "")
    if not isinstance(name, str):
        raise ValueError("'name' must be a string")
    return InfluenceNetwork(n=n, edges=edges, k=data["k"], x0=data["x0"],
                            T=float(data["T"]), name=name)


def network_to_dict(net: InfluenceNetwork) -> dict:
    """Inverse of network_from_dict; edge list sorted for determinism."""
    out = {
        "n": int(net.n),
        "T": float(net.T),
        "x0": [float(v) for v in net.x0],
        "k": [float(v) for v in net.k],
        "edges": [
            {"from": i + 1, "to": j + 1, "w": float(w)}
            for (i, j), w in sorted(net.edges.items())
        ],
    }
    if net.name:
        out["name"] = net.name
    return out
