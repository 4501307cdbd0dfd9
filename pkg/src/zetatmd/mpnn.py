"""Deterministic reference message-passing network (forward pass only).

Per layer, every node v becomes ``f(concat(x_v, sum_u g(concat(x_u, e_vu))))``
and the graph readout is ``c(sum_v x_v)``.  MLPs are bias-free stacks of
matrices with ReLU between them, so the zero vector is a fixed point of every
MLP.  Sums are accumulated after sorting the summands by their bytes, which
makes the output bitwise independent of the node labelling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, ValidationError
from .graph import Graph

POWER_ITERS = 1000
POWER_TOL = 1e-10


@dataclass(frozen=True)
class MlpWeights:
    """Matrices stored as (out, in) and applied as ``y = W x``."""

    matrices: tuple

    def __post_init__(self):
        mats = []
        for i, m in enumerate(self.matrices):
            a = np.array(m, dtype=np.float64)
            if a.ndim != 2:
                raise ContractError(f"MLP matrix {i} is not 2-D")
            if not np.all(np.isfinite(a)):
                raise ContractError(f"MLP matrix {i} has non-finite entries")
            a.setflags(write=False)
            mats.append(a)
        if not mats:
            raise ContractError("MLP needs at least one matrix")
        for i in range(1, len(mats)):
            if mats[i].shape[1] != mats[i - 1].shape[0]:
                raise ContractError(
                    f"MLP matrix {i} expects input {mats[i].shape[1]}, previous outputs {mats[i - 1].shape[0]}"
                )
        object.__setattr__(self, "matrices", tuple(mats))

    @property
    def in_dim(self) -> int:
        return self.matrices[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.matrices[-1].shape[0]

    def __call__(self, X: np.ndarray) -> np.ndarray:
        """Apply to the rows of ``X``; each row is computed independently."""
        h = np.asarray(X, dtype=np.float64)
        for i, W in enumerate(self.matrices):
            # elementwise products then a per-row reduction: row results do
            # not depend on how many rows are batched together
            h = (h[:, None, :] * W[None, :, :]).sum(axis=-1)
            if i + 1 < len(self.matrices):
                h = np.maximum(h, 0.0)
        return h

    def lipschitz(self) -> float:
        out = 1.0
        for W in self.matrices:
            out *= spectral_norm(W)
        return out


@dataclass(frozen=True)
class MpnnModel:
    layers: tuple  # ((g, f), ...)
    classifier: MlpWeights
    input_dim: int
    edge_dim: int = 0

    def __post_init__(self):
        dim = self.input_dim
        for t, (g, f) in enumerate(self.layers, 1):
            if g.in_dim != dim + self.edge_dim:
                raise ContractError(f"layer {t} message expects {g.in_dim}, node+edge dim is {dim + self.edge_dim}")
            if f.in_dim != dim + g.out_dim:
                raise ContractError(f"layer {t} update expects {f.in_dim}, node+message dim is {dim + g.out_dim}")
            dim = f.out_dim
        if self.classifier.in_dim != dim:
            raise ContractError(f"classifier expects {self.classifier.in_dim}, node dim is {dim}")
        object.__setattr__(self, "layers", tuple(tuple(p) for p in self.layers))

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def num_classes(self) -> int:
        return self.classifier.out_dim

    def matrices(self):
        for g, f in self.layers:
            yield from g.matrices
            yield from f.matrices
        yield from self.classifier.matrices


def sorted_sum(rows: np.ndarray, dim: int) -> np.ndarray:
    """Sum of ``rows`` accumulated in a labelling-independent order."""
    if rows.shape[0] == 0:
        return np.zeros(dim)
    rows = np.ascontiguousarray(rows)
    keys = rows.view(np.dtype((np.void, rows.dtype.itemsize * rows.shape[1]))).ravel()
    total = np.zeros(dim)
    for i in np.argsort(keys, kind="stable"):
        total = total + rows[i]
    return total


def forward(m: MpnnModel, g: Graph) -> np.ndarray:
    if g.feature_dim != m.input_dim:
        raise ContractError(f"graph feature dim {g.feature_dim} != model input dim {m.input_dim}")
    if m.edge_dim and g.edge_count and g.edge_dim != m.edge_dim:
        raise ContractError(f"graph edge dim {g.edge_dim} != model edge dim {m.edge_dim}")
    if not m.edge_dim and g.edge_attr is not None and g.edge_dim:
        raise ContractError("graph has edge features but the model takes none")
    indptr, indices, eids = g.csr
    x = np.asarray(g.x, dtype=np.float64)
    n = g.node_count
    for gm, fm in m.layers:
        src = x[indices]
        if m.edge_dim:
            e = np.zeros((len(eids), m.edge_dim)) if g.edge_attr is None else g.edge_attr[eids]
            src = np.hstack([src, e.reshape(len(eids), m.edge_dim)])
        msgs = gm(src)
        agg = np.empty((n, gm.out_dim))
        for v in range(n):
            agg[v] = sorted_sum(msgs[indptr[v]:indptr[v + 1]], gm.out_dim)
        x = fm(np.hstack([x, agg]))
    return m.classifier(sorted_sum(x, x.shape[1])[None, :])[0]


def spectral_norm(matrix) -> float:
    """Largest singular value by power iteration on ``A^T A``.

    Starts from the normalised all-ones vector and from each standard basis
    vector and keeps the largest converged estimate; a single start can be
    orthogonal to the top right singular vector.
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise ContractError("spectral_norm needs a 2-D matrix")
    if a.size == 0:
        return 0.0
    ata = a.T @ a
    m = ata.shape[0]
    starts = np.hstack([np.full((m, 1), 1.0 / np.sqrt(m)), np.eye(m)])
    best = 0.0
    for j in range(starts.shape[1]):
        v = starts[:, j]
        lam = 0.0
        for _ in range(POWER_ITERS):
            w = ata @ v
            nrm = np.linalg.norm(w)
            if nrm == 0.0:
                lam = 0.0
                break
            v = w / nrm
            if abs(nrm - lam) <= POWER_TOL * max(nrm, 1.0):
                lam = nrm
                break
            lam = nrm
        # Rayleigh quotient is more accurate than the step ratio
        lam = max(lam, float(v @ ata @ v))
        best = max(best, lam)
    return float(np.sqrt(best))


def lipschitz_bound(m: MpnnModel) -> float:
    """``L_c * 2^T * prod_t max(1, L_f) * max(1, L_g)``.

    Factors for f and g are floored at 1: the recursion that yields the
    constant needs them at least 1 (a zero message MLP still lets the root
    features through).
    """
    out = m.classifier.lipschitz() * 2.0 ** m.depth
    for g, f in m.layers:
        out *= max(1.0, f.lipschitz()) * max(1.0, g.lipschitz())
    return out


def margin_loss(logits, labels, gamma: float) -> float:
    z = np.asarray(logits, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if z.ndim != 2 or z.shape[1] < 2:
        raise ContractError("logits must be (graphs, K) with K >= 2")
    if y.shape != (z.shape[0],):
        raise ContractError("need one label per logits row")
    if gamma < 0 or np.isnan(gamma):
        raise ContractError("margin must be >= 0")
    if np.any(y < 0) or np.any(y >= z.shape[1]):
        raise ContractError(f"labels must lie in [0, {z.shape[1]})")
    if z.shape[0] == 0:
        return 0.0
    rows = np.arange(z.shape[0])
    true = z[rows, y]
    other = z.copy()
    other[rows, y] = -np.inf
    fails = true <= gamma + other.max(axis=1)
    return float(fails.mean())


def random_mlp(rng: np.random.Generator, dims: Sequence[int]) -> MlpWeights:
    mats = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        mats.append(rng.uniform(-1.0, 1.0, size=(fan_out, fan_in)) / np.sqrt(max(fan_in, 1)))
    return MlpWeights(tuple(mats))


def random_model(
    seed: int,
    input_dim: int,
    depth: int,
    hidden: int,
    num_classes: int = 2,
    edge_dim: int = 0,
    mlp_depth: int = 2,
) -> MpnnModel:
    """Seeded model; every MLP has ``mlp_depth`` matrices of width ``hidden``."""
    if depth < 0 or hidden < 1 or mlp_depth < 1 or num_classes < 1 or input_dim < 0:
        raise ContractError("invalid architecture")
    rng = np.random.default_rng(seed)
    mid = [hidden] * (mlp_depth - 1)
    layers = []
    dim = input_dim
    for _ in range(depth):
        g = random_mlp(rng, [dim + edge_dim, *mid, hidden])
        f = random_mlp(rng, [dim + hidden, *mid, hidden])
        layers.append((g, f))
        dim = hidden
    c = random_mlp(rng, [dim, *mid, num_classes])
    return MpnnModel(tuple(layers), c, input_dim, edge_dim)


# weight files ------------------------------------------------------------------

def _mlp_to_obj(m: MlpWeights):
    return [W.tolist() for W in m.matrices]


def _mlp_from_obj(obj, where: str) -> MlpWeights:
    arr = obj
    if not isinstance(arr, list) or not arr:
        raise ValidationError(f"{where}: expected a matrix or a list of matrices")
    # a single matrix nests two levels deep, a stack of them three
    if isinstance(arr[0], list) and arr[0] and isinstance(arr[0][0], list):
        mats = arr
    else:
        mats = [arr]
    try:
        out = []
        for M in mats:
            a = np.array(M, dtype=np.float64)
            if a.ndim != 2:
                raise ValueError("ragged or non-2-D matrix")
            out.append(a)
        return MlpWeights(tuple(out))
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"{where}: {exc}") from None


def model_to_obj(m: MpnnModel) -> dict:
    return {
        "layers": [{"g": _mlp_to_obj(g), "f": _mlp_to_obj(f)} for g, f in m.layers],
        "classifier": _mlp_to_obj(m.classifier),
        "meta": {"input_dim": m.input_dim, "classes": m.num_classes, "edge_dim": m.edge_dim},
    }


def model_from_obj(obj) -> MpnnModel:
    if not isinstance(obj, dict) or "layers" not in obj or "classifier" not in obj:
        raise ValidationError("weight file needs 'layers' and 'classifier'")
    layers = []
    for t, layer in enumerate(obj["layers"]):
        if not isinstance(layer, dict) or "g" not in layer or "f" not in layer:
            raise ValidationError(f"layer {t} needs 'g' and 'f'")
        layers.append((_mlp_from_obj(layer["g"], f"layer {t} g"), _mlp_from_obj(layer["f"], f"layer {t} f")))
    c = _mlp_from_obj(obj["classifier"], "classifier")
    meta = obj.get("meta", {}) or {}
    edge_dim = int(meta.get("edge_dim", 0))
    if "input_dim" in meta:
        input_dim = int(meta["input_dim"])
    elif layers:
        input_dim = layers[0][0].in_dim - edge_dim
    else:
        input_dim = c.in_dim
    model = MpnnModel(tuple(layers), c, input_dim, edge_dim)
    if "classes" in meta and int(meta["classes"]) != model.num_classes:
        raise ContractError(f"meta.classes={meta['classes']} but classifier outputs {model.num_classes}")
    return model


def save_model(m: MpnnModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_obj(m), fh)
        fh.write("\n")


def load_model(path) -> MpnnModel:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: bad JSON at line {exc.lineno}: {exc.msg}") from None
    return model_from_obj(obj)


def weight_sq_norm_sum(mats) -> float:
    return float(sum(spectral_norm(W) ** 2 for W in mats))


def max_hidden_width(m: MpnnModel) -> int:
    return max(max(W.shape) for W in m.matrices())


def model_bound_fields(m: MpnnModel, graphs: Optional[Sequence[Graph]] = None, classifier_only: bool = False) -> dict:
    """BoundParams fields derivable from a model (and the training graphs)."""
    mats = list(m.classifier.matrices) if classifier_only else list(m.matrices())
    norms = [spectral_norm(W) for W in mats]
    out = {
        "hidden_dim": max(max(W.shape) for W in mats),
        "depth_count": len(mats),
        "spec_cap": max(norms) if max(norms) > 0 else 1.0,
        "weight_sq_norm_sum": float(sum(s * s for s in norms)),
        "classes": m.num_classes,
    }
    if graphs is not None:
        from .graph import dataset_stats

        st = dataset_stats(graphs)
        out["max_degree"] = st.max_degree
        out["feature_bound"] = st.feature_bound
    return out
