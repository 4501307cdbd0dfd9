"""Seeded synthetic graphs (Erdos-Renyi, Barabasi-Albert, stochastic block
model) and cycle-count median labels.

Graph ``i`` of a run draws only from its own Philox stream, spawned from the
run seed with key ``(i,)``, so any subset of graphs can be regenerated (or
generated in parallel) with identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractError, ValidationError
from .graph import Graph, GraphDataset
from .transforms import PatternFamilySpec, graph_cycle_counts

MODELS = ("er", "ba", "sbm")


@dataclass(frozen=True)
class GenSpec:
    model: str
    params: dict
    n_nodes_range: tuple
    n_graphs: int
    seed: int

    def __post_init__(self):
        if self.model not in MODELS:
            raise ContractError(f"unknown model {self.model!r}")
        lo, hi = self.n_nodes_range
        if not (0 <= lo <= hi):
            raise ContractError(f"bad node range {lo}:{hi}")
        if self.n_graphs < 1:
            raise ContractError("n_graphs must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ContractError("seed must be a 64-bit unsigned integer")
        p = self.params
        if self.model == "er":
            _check_prob("p", p.get("p"))
        elif self.model == "ba":
            m = p.get("m")
            if not isinstance(m, int) or m < 1:
                raise ContractError("ba needs integer m >= 1")
            if lo < m + 1:
                raise ContractError(f"ba with m={m} needs at least {m + 1} nodes")
        else:
            blo, bhi = p.get("blocks", (3, 6))
            if not (1 <= blo <= bhi):
                raise ContractError("bad block range")
            for key in ("p_in", "p_out"):
                a, b = p.get(key, (0.0, 0.0))
                _check_prob(key, a)
                _check_prob(key, b)
                if a > b:
                    raise ContractError(f"bad {key} range")
            if 3 * blo > hi:
                raise ContractError(f"sbm: {blo} blocks of >= 3 nodes never fit in {hi} nodes")


def _check_prob(name, v):
    if not isinstance(v, (int, float)) or not 0.0 <= v <= 1.0:
        raise ContractError(f"{name} must be a probability in [0, 1], got {v!r}")


def parse_range(text: str, cast=float) -> tuple:
    lo, sep, hi = text.partition(":")
    try:
        a = cast(lo)
        b = cast(hi) if sep else a
    except ValueError:
        raise ValidationError(f"bad range {text!r}") from None
    return a, b


def parse_model(text: str) -> tuple[str, dict]:
    """``er:p=0.1``, ``ba:m=2``, ``sbm:blocks=3:6,p_in=0.1:0.3,p_out=0.001:0.02``."""
    name, _, rest = text.partition(":")
    params = {}
    try:
        for item in filter(None, rest.split(",")):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValueError(item)
            if name == "er" and key == "p":
                params["p"] = float(val)
            elif name == "ba" and key == "m":
                params["m"] = int(val)
            elif name == "sbm" and key == "blocks":
                params["blocks"] = parse_range(val, int)
            elif name == "sbm" and key in ("p_in", "p_out"):
                params[key] = parse_range(val, float)
            else:
                raise ValueError(item)
    except ValueError as exc:
        raise ValidationError(f"bad model option {exc} in {text!r}") from None
    if name not in MODELS:
        raise ValidationError(f"unknown model {name!r}; expected er, ba or sbm")
    if name == "er" and "p" not in params:
        raise ValidationError("er needs p=<prob>")
    if name == "ba" and "m" not in params:
        raise ValidationError("ba needs m=<int>")
    if name == "sbm":
        params.setdefault("blocks", (3, 6))
        params.setdefault("p_in", (0.1, 0.3))
        params.setdefault("p_out", (0.001, 0.02))
    return name, params


def graph_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _pairs(n):
    iu, ju = np.triu_indices(n, 1)
    return np.stack([iu, ju], axis=1)


def erdos_renyi(rng, n, p) -> np.ndarray:
    pairs = _pairs(n)
    return pairs[rng.random(len(pairs)) < p]


def barabasi_albert(rng, n, m) -> np.ndarray:
    # star seed on nodes 0..m, then each new node picks m distinct targets
    # with probability proportional to degree (sampled from the endpoint list)
    edges = [(0, v) for v in range(1, m + 1)]
    ends = [u for e in edges for u in e]
    for v in range(m + 1, n):
        targets = set()
        while len(targets) < m:
            targets.add(ends[int(rng.integers(len(ends)))])
        for u in sorted(targets):
            edges.append((u, v))
            ends.extend((u, v))
    return np.array(edges, dtype=np.int64).reshape(-1, 2)


def stochastic_block(rng, n, blocks, p_in, p_out) -> np.ndarray:
    sizes = 3 + rng.multinomial(n - 3 * blocks, np.full(blocks, 1.0 / blocks))
    member = np.repeat(np.arange(blocks), sizes)
    pairs = _pairs(n)
    same = member[pairs[:, 0]] == member[pairs[:, 1]]
    prob = np.where(same, p_in, p_out)
    return pairs[rng.random(len(pairs)) < prob]


def generate_one(spec: GenSpec, index: int) -> Graph:
    rng = graph_rng(spec.seed, index)
    lo, hi = spec.n_nodes_range
    p = spec.params
    while True:
        n = int(rng.integers(lo, hi + 1))
        if spec.model == "er":
            edges = erdos_renyi(rng, n, p["p"])
        elif spec.model == "ba":
            edges = barabasi_albert(rng, n, p["m"])
        else:
            blocks = int(rng.integers(p["blocks"][0], p["blocks"][1] + 1))
            if 3 * blocks > n:
                continue  # infeasible draw, retry from the same stream
            p_in = float(rng.uniform(*p["p_in"]))
            p_out = float(rng.uniform(*p["p_out"]))
            edges = stochastic_block(rng, n, blocks, p_in, p_out)
        return Graph(np.ones((n, 1)), edges)


def generate(spec: GenSpec) -> GraphDataset:
    return GraphDataset([generate_one(spec, i) for i in range(spec.n_graphs)])


# labels ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LabelSpec:
    task: str = "cycle-median"
    count_mode: str = "subgraph"
    lengths: tuple = (3, 4)

    def __post_init__(self):
        if self.task != "cycle-median":
            raise ContractError(f"unknown labelling task {self.task!r}")
        if not self.lengths:
            raise ContractError("lengths must be nonempty")
        if any(int(l) < 3 for l in self.lengths):
            raise ContractError("cycle lengths must be >= 3")
        # normalises aliases and validates the mode
        object.__setattr__(self, "count_mode", PatternFamilySpec(self.count_mode, 3).mode)
        object.__setattr__(self, "lengths", tuple(sorted({int(l) for l in self.lengths})))


def cycle_scores(graphs: Sequence[Graph], spec: LabelSpec) -> list:
    fam = PatternFamilySpec(spec.count_mode, max(spec.lengths))
    out = []
    for g in graphs:
        counts = graph_cycle_counts(g, fam)
        out.append(int(sum(int(counts[l - 3]) for l in spec.lengths)))
    return out


def lower_median(values) -> int:
    s = sorted(values)
    return s[(len(s) - 1) // 2]


def label_cycle_median(ds: GraphDataset, spec: LabelSpec = LabelSpec()) -> GraphDataset:
    """Label 1 iff the cycle score is strictly above the lower median."""
    if len(ds) == 0:
        raise ContractError("cannot label an empty dataset")
    scores = cycle_scores(ds.graphs, spec)
    med = lower_median(scores)
    return ds.with_labels([int(s > med) for s in scores], num_classes=2)


def split_dataset(ds: GraphDataset, frac: float, seed: int) -> tuple[GraphDataset, GraphDataset]:
    """Seeded random split; the first part gets ``round(frac * n)`` graphs, order preserved."""
    if not 0.0 <= frac <= 1.0:
        raise ContractError("frac must lie in [0, 1]")
    n = len(ds)
    k = int(round(frac * n))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    chosen = np.zeros(n, dtype=bool)
    chosen[rng.permutation(n)[:k]] = True
    return ds.subset(np.flatnonzero(chosen)), ds.subset(np.flatnonzero(~chosen))
