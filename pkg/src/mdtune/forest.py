"""CART decision trees with Gini splitting, a bootstrap-aggregated
forest, JSON model files, and the forest-backed selection strategy.

Trees are stored as flat node lists (children always after parents);
internal nodes send feature f through `x[f] <= t ? left : right`, leaves
hold training class counts. All tie-breaks (leaf majorities, vote
ranking) go to the smallest class id so training and prediction are
deterministic for a fixed seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import ceil, sqrt

import numpy as np

from .livestats import FEATURE_NAMES
from .tuning import Strategy, TuningError

FORMAT_VERSION = 1
DEFAULT_TOP_K = 3


def gini(labels) -> float:
    """1 − Σ pᵢ² over the class distribution."""
    arr = np.asarray(labels)
    if arr.size == 0:
        raise ValueError("gini of an empty label set is undefined")
    _, counts = np.unique(arr, return_counts=True)
    p = counts / arr.size
    return float(1.0 - np.sum(p * p))


def best_split(features: np.ndarray, labels: np.ndarray,
               feature_subset) -> tuple[int, float] | None:
    """Minimize weighted child Gini over midpoint thresholds of the given
    features; None when nothing improves on the parent impurity.

    ``labels`` must be integer class indices.
    """
    n = labels.size
    if n < 2:
        return None
    n_classes = int(labels.max()) + 1
    totals = np.bincount(labels, minlength=n_classes).astype(float)
    parent = 1.0 - float(np.sum(totals * totals)) / (n * n)
    best = None
    best_score = parent
    for f in sorted(int(f) for f in feature_subset):
        x = features[:, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        boundary = np.nonzero(xs[1:] > xs[:-1])[0] + 1
        if boundary.size == 0:
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), labels[order]] = 1.0
        cum = np.cumsum(onehot, axis=0)
        left = cum[boundary - 1]
        right = totals - left
        nl = boundary.astype(float)
        nr = n - nl
        score = 1.0 - (np.sum(left * left, axis=1) / nl
                       + np.sum(right * right, axis=1) / nr) / n
        idx = int(np.argmin(score))
        if score[idx] < best_score:
            t = 0.5 * (xs[boundary[idx] - 1] + xs[boundary[idx]])
            # float midpoints can collapse onto the upper value; pin the
            # threshold so the counted partition is the real partition
            if not xs[boundary[idx] - 1] <= t < xs[boundary[idx]]:
                t = xs[boundary[idx] - 1]
            best_score = float(score[idx])
            best = (f, float(t))
    return best


def _grow_tree(features, labels, n_classes, n_features_split, rng):
    """Preorder flat node list for one tree."""
    nodes = []

    def build(idx: np.ndarray) -> int:
        my_id = len(nodes)
        nodes.append(None)
        counts = np.bincount(labels[idx], minlength=n_classes)
        if np.count_nonzero(counts) == 1 or idx.size < 2:
            nodes[my_id] = {"leaf": counts.tolist()}
            return my_id
        subset = rng.choice(features.shape[1], size=n_features_split,
                            replace=False)
        split = best_split(features[idx], labels[idx], subset)
        if split is None:
            nodes[my_id] = {"leaf": counts.tolist()}
            return my_id
        f, t = split
        mask = features[idx, f] <= t
        left = build(idx[mask])
        right = build(idx[~mask])
        nodes[my_id] = {"f": f, "t": t, "l": left, "r": right}
        return my_id

    build(np.arange(labels.size))
    return nodes


@dataclass
class Forest:
    trees: list
    classes: list[str]
    seed: int
    feature_order: tuple = FEATURE_NAMES

    @property
    def n_estimators(self) -> int:
        return len(self.trees)


def train_forest(features, labels, n_estimators: int = 100,
                 seed: int = 0) -> Forest:
    """Bag ``n_estimators`` CART trees over bootstrap samples (size n,
    with replacement) with per-node feature subsets of ⌈√d⌉."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ValueError("training data must be a nonempty 2-d array")
    labels = list(labels)
    if len(labels) != features.shape[0]:
        raise ValueError("feature/label row counts differ")
    classes = sorted(set(labels))
    class_index = {c: i for i, c in enumerate(classes)}
    y = np.array([class_index[l] for l in labels], dtype=np.int64)
    n = y.size
    d = features.shape[1]
    n_split = min(d, ceil(sqrt(d)))
    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(n_estimators):
        sample = rng.integers(0, n, size=n)
        trees.append(_grow_tree(features[sample], y[sample], len(classes),
                                n_split, rng))
    return Forest(trees=trees, classes=classes, seed=seed)


def _tree_class(nodes, x) -> int:
    node = nodes[0]
    while "leaf" not in node:
        node = nodes[node["l"] if x[node["f"]] <= node["t"] else node["r"]]
    counts = node["leaf"]
    return int(np.argmax(counts))


def predict_votes(forest: Forest, features) -> dict[str, float]:
    """Per-class vote fractions (only classes that received votes)."""
    x = np.asarray(features, dtype=float)
    if x.shape != (len(forest.feature_order),):
        raise ValueError(
            f"expected {len(forest.feature_order)} features, "
            f"got shape {x.shape}")
    counts: dict[str, int] = {}
    for nodes in forest.trees:
        cls = forest.classes[_tree_class(nodes, x)]
        counts[cls] = counts.get(cls, 0) + 1
    total = forest.n_estimators
    return {c: v / total for c, v in counts.items()}


def rf_candidates(stats, forest: Forest, space, k: int = DEFAULT_TOP_K):
    """Top-k voted configurations present in the space (rank ties to the
    smaller id); falls back to the whole space if no voted class is
    available."""
    votes = predict_votes(forest, stats.feature_vector())
    ranked = sorted(votes, key=lambda c: (-votes[c], c))
    by_id = {c.id: c for c in space}
    chosen = [by_id[c] for c in ranked if c in by_id][:max(1, k)]
    return chosen if chosen else list(space)


# -- model file --------------------------------------------------------------

def serialize_forest(forest: Forest) -> bytes:
    doc = {
        "formatVersion": FORMAT_VERSION,
        "featureOrder": list(forest.feature_order),
        "classes": list(forest.classes),
        "seed": forest.seed,
        "trees": [{"nodes": nodes} for nodes in forest.trees],
    }
    return json.dumps(doc, sort_keys=True).encode()


class ModelFormatError(ValueError):
    pass


def _expect(cond, path, message):
    if not cond:
        raise ModelFormatError(f"{path}: {message}")


def deserialize_forest(data: bytes) -> Forest:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"$: not valid JSON ({exc})") from None
    _expect(isinstance(doc, dict), "$", "expected an object")
    version = doc.get("formatVersion")
    _expect(version == FORMAT_VERSION, "$.formatVersion",
            f"version {version!r} not supported "
            f"(expected {FORMAT_VERSION})")
    order = doc.get("featureOrder")
    _expect(order == list(FEATURE_NAMES), "$.featureOrder",
            f"must be the live-statistics feature order "
            f"{list(FEATURE_NAMES)}")
    classes = doc.get("classes")
    _expect(isinstance(classes, list) and classes
            and all(isinstance(c, str) for c in classes),
            "$.classes", "expected a nonempty list of strings")
    _expect(isinstance(doc.get("seed"), int), "$.seed",
            "expected an integer")
    trees_doc = doc.get("trees")
    _expect(isinstance(trees_doc, list) and trees_doc, "$.trees",
            "expected a nonempty list")
    trees = []
    for ti, tree in enumerate(trees_doc):
        tpath = f"$.trees[{ti}]"
        _expect(isinstance(tree, dict) and isinstance(tree.get("nodes"),
                                                      list),
                tpath, "expected an object with a 'nodes' list")
        nodes = tree["nodes"]
        _expect(len(nodes) >= 1, f"{tpath}.nodes", "tree has no nodes")
        for ni, node in enumerate(nodes):
            npath = f"{tpath}.nodes[{ni}]"
            _expect(isinstance(node, dict), npath, "expected an object")
            if "leaf" in node:
                counts = node["leaf"]
                _expect(isinstance(counts, list)
                        and len(counts) == len(classes)
                        and all(isinstance(c, int) and c >= 0
                                for c in counts)
                        and sum(counts) > 0,
                        npath, "leaf counts must be nonnegative ints per "
                               "class with a nonzero total")
            else:
                _expect(all(key in node for key in ("f", "t", "l", "r")),
                        npath, "internal node needs f, t, l, r")
                _expect(isinstance(node["f"], int)
                        and 0 <= node["f"] < len(FEATURE_NAMES),
                        f"{npath}.f", "feature index out of range")
                _expect(isinstance(node["t"], (int, float)),
                        f"{npath}.t", "threshold must be a number")
                for key in ("l", "r"):
                    child = node[key]
                    _expect(isinstance(child, int)
                            and ni < child < len(nodes),
                            f"{npath}.{key}",
                            "child index must point past the parent")
        trees.append(nodes)
    return Forest(trees=trees, classes=list(classes),
                  seed=int(doc["seed"]))


def save_forest(forest: Forest, path):
    with open(path, "wb") as fh:
        fh.write(serialize_forest(forest))


def load_forest(path) -> Forest:
    with open(path, "rb") as fh:
        return deserialize_forest(fh.read())


class RandomForestStrategy(Strategy):
    """Trials the forest's top-k suggestions each phase."""

    name = "random-forest"

    def __init__(self, forest: Forest, k: int = DEFAULT_TOP_K):
        self.forest = forest
        self.k = k

    def candidates(self, space, phase, states, stats, controller):
        if stats is None:
            raise TuningError(
                "random-forest strategy needs live statistics each phase")
        return rf_candidates(stats, self.forest, space, self.k)
