"""Gradient-boosted regression trees for squared loss.

Trees are grown level by level with exact greedy splits: every feature is
presorted once per fit, and a single pass over each sorted column scores all
candidate thresholds of all open nodes at that depth. A node splits on the
(feature, threshold) pair with the largest reduction in squared error; ties
keep the lowest feature index and the lowest threshold, so fits are
deterministic. Thresholds are midpoints between neighbouring distinct values
and samples with ``x <= threshold`` go left.

One ensemble is fitted per output column.
"""
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ..exceptions import ConfigurationError, ShapeError
from .linear import _as_2d


@njit(cache=True, nogil=True)
def _grow_tree(Xs, order, X, resid, max_depth, min_leaf, learning_rate, leaf_of):
    n_features, n = Xs.shape
    max_nodes = 2 ** (max_depth + 1) - 1
    feature = np.full(max_nodes, -1, np.int32)
    threshold = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, np.int32)
    right = np.full(max_nodes, -1, np.int32)
    value = np.zeros(max_nodes)

    node_of = np.zeros(n, np.int32)
    n_nodes = 1
    active = np.zeros(1, np.int32)
    slot = np.full(max_nodes, -1, np.int32)
    for depth in range(max_depth + 1):
        m = active.shape[0]
        if m == 0:
            break
        for s in range(m):
            slot[active[s]] = s
        total = np.zeros(m)
        count = np.zeros(m, np.int64)
        for i in range(n):
            k = node_of[i]
            if k >= 0:
                total[slot[k]] += resid[i]
                count[slot[k]] += 1
        best_gain = np.zeros(m)
        best_feat = np.full(m, -1, np.int32)
        best_thr = np.zeros(m)
        if depth < max_depth:
            lsum = np.zeros(m)
            lcnt = np.zeros(m, np.int64)
            last = np.zeros(m)
            base = np.zeros(m)
            for s in range(m):
                base[s] = total[s] * total[s] / count[s]
            for j in range(n_features):
                lsum[:] = 0.0
                lcnt[:] = 0
                for p in range(n):
                    i = order[j, p]
                    k = node_of[i]
                    if k < 0:
                        continue
                    s = slot[k]
                    v = Xs[j, p]
                    c = lcnt[s]
                    if c >= min_leaf and count[s] - c >= min_leaf and v > last[s]:
                        ls = lsum[s]
                        rs = total[s] - ls
                        gain = ls * ls / c + rs * rs / (count[s] - c) - base[s]
                        if gain > best_gain[s]:
                            mid = 0.5 * (last[s] + v)
                            if not (last[s] <= mid < v):
                                mid = last[s]
                            best_gain[s] = gain
                            best_feat[s] = j
                            best_thr[s] = mid
                    lsum[s] += resid[i]
                    lcnt[s] = c + 1
                    last[s] = v
        next_active = np.empty(2 * m, np.int32)
        n_next = 0
        for s in range(m):
            k = active[s]
            if best_feat[s] >= 0:
                feature[k] = best_feat[s]
                threshold[k] = best_thr[s]
                left[k] = n_nodes
                right[k] = n_nodes + 1
                next_active[n_next] = n_nodes
                next_active[n_next + 1] = n_nodes + 1
                n_next += 2
                n_nodes += 2
            else:
                value[k] = learning_rate * total[s] / count[s]
        for i in range(n):
            k = node_of[i]
            if k < 0:
                continue
            if feature[k] >= 0:
                node_of[i] = left[k] if X[i, feature[k]] <= threshold[k] else right[k]
            else:
                leaf_of[i] = k
                node_of[i] = -1
        for s in range(m):
            slot[active[s]] = -1
        active = next_active[:n_next].copy()
    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes]


@njit(cache=True, nogil=True)
def _grow_tree_hist(B, edges, n_edges, resid, max_depth, min_leaf, learning_rate, leaf_of):
    n_features, n = B.shape
    n_bins = edges.shape[1] + 1
    max_nodes = 2 ** (max_depth + 1) - 1
    feature = np.full(max_nodes, -1, np.int32)
    threshold = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, np.int32)
    right = np.full(max_nodes, -1, np.int32)
    value = np.zeros(max_nodes)

    node_of = np.zeros(n, np.int32)
    n_nodes = 1
    active = np.zeros(1, np.int32)
    slot = np.full(max_nodes, -1, np.int32)
    best_bin_of = np.zeros(max_nodes, np.int32)
    for depth in range(max_depth + 1):
        m = active.shape[0]
        if m == 0:
            break
        for s in range(m):
            slot[active[s]] = s
        total = np.zeros(m)
        count = np.zeros(m, np.int64)
        best_feat = np.full(m, -1, np.int32)
        if depth < max_depth:
            node_slot = np.full(n, -1, np.int32)
            for i in range(n):
                k = node_of[i]
                if k >= 0:
                    s = slot[k]
                    node_slot[i] = s
                    total[s] += resid[i]
                    count[s] += 1
            best_gain = np.zeros(m)
            hsum = np.zeros((m, n_bins))
            hcnt = np.zeros((m, n_bins), np.int64)
            for j in range(n_features):
                hsum[:] = 0.0
                hcnt[:] = 0
                for i in range(n):
                    s = node_slot[i]
                    if s >= 0:
                        b = B[j, i]
                        hsum[s, b] += resid[i]
                        hcnt[s, b] += 1
                for s in range(m):
                    ls = 0.0
                    lc = 0
                    base = total[s] * total[s] / count[s]
                    for b in range(n_edges[j]):
                        ls += hsum[s, b]
                        lc += hcnt[s, b]
                        rc = count[s] - lc
                        if lc < min_leaf or hcnt[s, b] == 0:
                            continue
                        if rc < min_leaf:
                            break
                        rs = total[s] - ls
                        gain = ls * ls / lc + rs * rs / rc - base
                        if gain > best_gain[s]:
                            best_gain[s] = gain
                            best_feat[s] = j
                            best_bin_of[active[s]] = b
        else:
            for i in range(n):
                k = node_of[i]
                if k >= 0:
                    total[slot[k]] += resid[i]
                    count[slot[k]] += 1
        next_active = np.empty(2 * m, np.int32)
        n_next = 0
        for s in range(m):
            k = active[s]
            if best_feat[s] >= 0:
                feature[k] = best_feat[s]
                threshold[k] = edges[best_feat[s], best_bin_of[k]]
                left[k] = n_nodes
                right[k] = n_nodes + 1
                next_active[n_next] = n_nodes
                next_active[n_next + 1] = n_nodes + 1
                n_next += 2
                n_nodes += 2
            else:
                value[k] = learning_rate * total[s] / count[s]
        for i in range(n):
            k = node_of[i]
            if k < 0:
                continue
            if feature[k] >= 0:
                node_of[i] = left[k] if B[feature[k], i] <= best_bin_of[k] else right[k]
            else:
                leaf_of[i] = k
                node_of[i] = -1
        for s in range(m):
            slot[active[s]] = -1
        active = next_active[:n_next].copy()
    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes]


def bin_features(X, max_bins):
    """Quantile bins per column.

    Returns ``(codes, edges, n_edges)``: ``codes[j, i]`` is the number of
    edges of column ``j`` below ``X[i, j]``, so ``x <= edges[j, b]`` exactly
    when ``codes <= b``. Edges are midpoints between neighbouring distinct
    training values; a column with at most ``max_bins`` distinct values gets
    an edge between every pair.
    """
    n, f = X.shape
    edges = np.full((f, max_bins - 1), np.inf)
    n_edges = np.zeros(f, np.int32)
    codes = np.empty((f, n), np.uint16 if max_bins > 256 else np.uint8)
    for j in range(f):
        values, counts = np.unique(X[:, j], return_counts=True)
        if len(values) <= max_bins:
            cut = np.arange(len(values) - 1)
        else:
            cum = np.cumsum(counts)
            targets = np.arange(1, max_bins) * (n / max_bins)
            cut = np.unique(np.minimum(np.searchsorted(cum, targets), len(values) - 2))
        lo, hi = values[cut], values[cut + 1]
        mid = 0.5 * (lo + hi)
        mid = np.where((lo <= mid) & (mid < hi), mid, lo)
        edges[j, :len(mid)] = mid
        n_edges[j] = len(mid)
        codes[j] = np.searchsorted(mid, X[:, j], side="left")
    return codes, edges, n_edges


@njit(cache=True, nogil=True)
def _tree_apply(X, feature, threshold, left, right, value, out):
    for i in range(X.shape[0]):
        k = 0
        while feature[k] >= 0:
            k = left[k] if X[i, feature[k]] <= threshold[k] else right[k]
        out[i] += value[k]


@njit(cache=True, nogil=True)
def _ensemble_predict(X, starts, horizon_of, feature, threshold, left, right, value, out):
    for t in range(starts.shape[0] - 1):
        h = horizon_of[t]
        off = starts[t]
        for i in range(X.shape[0]):
            k = 0
            while feature[off + k] >= 0:
                if X[i, feature[off + k]] <= threshold[off + k]:
                    k = left[off + k]
                else:
                    k = right[off + k]
            out[i, h] += value[off + k]


def _sse(r):
    return float(np.dot(r, r))


def _fit_column(grow, y, params, eval_X=None, eval_y=None):
    n_rounds, patience = params
    base = float(np.mean(y))
    resid = y - base
    losses = [_sse(resid) / len(y)]
    trees = []
    if np.all(y == y[0]):
        return base, trees, np.array(losses), None
    leaf_of = np.zeros(len(y), np.int32)
    eval_pred = None if eval_X is None else np.full(len(eval_y), base)
    eval_losses, best, since_best = [], np.inf, 0
    for _ in range(n_rounds):
        tree = grow(resid, leaf_of)
        resid = resid - tree[4][leaf_of]
        trees.append(tree)
        losses.append(_sse(resid) / len(y))
        if eval_pred is not None:
            _tree_apply(eval_X, *tree, eval_pred)
            err = _sse(eval_y - eval_pred) / len(eval_y)
            eval_losses.append(err)
            if err < best:
                best, since_best = err, 0
            else:
                since_best += 1
                if since_best >= patience:
                    break
    if eval_pred is not None:
        keep = int(np.argmin(eval_losses)) + 1
        trees, losses = trees[:keep], losses[: keep + 1]
    return base, trees, np.array(losses), eval_losses or None


class GbtModel(RegressorMixin, BaseEstimator):
    """Squared-loss gradient boosting, one ensemble per output column.

    Parameters
    ----------
    n_rounds : int
    max_depth : int
    learning_rate : float
        Shrinkage in ``(0, 1]``.
    min_samples_leaf : int
    early_stopping_rounds : int, optional
        Only used when ``fit`` receives ``eval_set``: stop a column after
        this many rounds without improvement on the evaluation data and keep
        the best prefix.
    split_method : {"exact", "hist"}
        ``"exact"`` scores every threshold between distinct values.
        ``"hist"`` scores only the edges of up to ``max_bins`` quantile bins
        per feature, which is much faster on wide designs; with at most
        ``max_bins`` distinct values per feature it finds the same
        partitions.
    max_bins : int
    n_jobs : int
        Threads used across output columns. Results do not depend on it.
    """

    def __init__(self, n_rounds=200, max_depth=6, learning_rate=0.1, min_samples_leaf=5,
                 early_stopping_rounds=None, split_method="exact", max_bins=256, n_jobs=1):
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_samples_leaf = min_samples_leaf
        self.early_stopping_rounds = early_stopping_rounds
        self.split_method = split_method
        self.max_bins = max_bins
        self.n_jobs = n_jobs

    def _check_params(self):
        if self.n_rounds < 0 or self.max_depth < 0:
            raise ConfigurationError("n_rounds and max_depth must be non-negative")
        if not 0 < self.learning_rate <= 1:
            raise ConfigurationError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        if self.min_samples_leaf < 1:
            raise ConfigurationError("min_samples_leaf must be at least 1")
        if self.split_method not in ("exact", "hist"):
            raise ConfigurationError(f"split_method must be 'exact' or 'hist', got {self.split_method!r}")
        if not 2 <= self.max_bins <= 65536:
            raise ConfigurationError("max_bins must lie in 2..65536")

    def fit(self, X, Y, eval_set=None):
        self._check_params()
        X = np.ascontiguousarray(_as_2d(X))
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim == 1:
            Y = Y[:, None]
        if Y.shape[0] != X.shape[0]:
            raise ShapeError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
        if X.shape[0] < 2 * self.min_samples_leaf:
            raise ShapeError(f"need at least {2 * self.min_samples_leaf} rows, got {X.shape[0]}")
        depth, leaf, lr = int(self.max_depth), int(self.min_samples_leaf), float(self.learning_rate)
        if self.split_method == "exact":
            order = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T)
            Xs = np.ascontiguousarray(np.take_along_axis(X, order.T, axis=0).T)

            def grow(resid, leaf_of):
                return _grow_tree(Xs, order, X, resid, depth, leaf, lr, leaf_of)
        else:
            codes, edges, n_edges = bin_features(X, int(self.max_bins))

            def grow(resid, leaf_of):
                return _grow_tree_hist(codes, edges, n_edges, resid, depth, leaf, lr, leaf_of)

        eval_X = eval_Y = None
        patience = self.early_stopping_rounds
        if eval_set is not None and patience:
            eval_X = np.ascontiguousarray(_as_2d(eval_set[0]))
            eval_Y = np.asarray(eval_set[1], dtype=np.float64).reshape(len(eval_X), -1)
        params = (int(self.n_rounds), int(patience or 0))

        def column(h):
            return _fit_column(
                grow, np.ascontiguousarray(Y[:, h]), params,
                eval_X, None if eval_Y is None else np.ascontiguousarray(eval_Y[:, h]),
            )

        if self.n_jobs and self.n_jobs > 1:
            with ThreadPoolExecutor(self.n_jobs) as pool:
                results = list(pool.map(column, range(Y.shape[1])))
        else:
            results = [column(h) for h in range(Y.shape[1])]
        self.base_score_ = np.array([r[0] for r in results])
        self.trees_ = [r[1] for r in results]
        self.train_loss_ = [r[2] for r in results]
        self.eval_loss_ = [r[3] for r in results]
        self.n_features_in_ = X.shape[1]
        self.n_outputs_ = Y.shape[1]
        self._pack()
        return self

    def _pack(self):
        parts, horizon_of, starts = [], [], [0]
        for h, trees in enumerate(self.trees_):
            for tree in trees:
                parts.append(tree)
                horizon_of.append(h)
                starts.append(starts[-1] + len(tree[0]))
        cols = list(zip(*parts)) if parts else [[]] * 5
        dtypes = (np.int32, np.float64, np.int32, np.int32, np.float64)
        self._flat = tuple(
            np.concatenate(c).astype(dt) if len(c) else np.empty(0, dt) for c, dt in zip(cols, dtypes)
        )
        self._starts = np.array(starts, np.int64)
        self._horizon_of = np.array(horizon_of, np.int64)

    def predict(self, X):
        check_is_fitted(self, "base_score_")
        X = np.ascontiguousarray(_as_2d(X))
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        out = np.tile(self.base_score_, (X.shape[0], 1))
        if len(self._horizon_of):
            _ensemble_predict(X, self._starts, self._horizon_of, *self._flat, out)
        return out

    def staged_loss(self):
        """Training MSE before boosting and after every round, per column."""
        check_is_fitted(self, "train_loss_")
        return self.train_loss_

    def get_state(self):
        feature, threshold, left, right, value = self._flat
        return {
            "base_score": self.base_score_,
            "starts": self._starts,
            "horizon_of": self._horizon_of,
            "feature": feature,
            "threshold": threshold,
            "left": left,
            "right": right,
            "value": value,
            "n_features": np.array([self.n_features_in_]),
        }

    @classmethod
    def from_state(cls, params, arrays):
        model = cls(**params)
        model.base_score_ = arrays["base_score"]
        model.n_outputs_ = len(model.base_score_)
        model.n_features_in_ = int(arrays["n_features"][0])
        starts, horizon_of = arrays["starts"], arrays["horizon_of"]
        flat = tuple(arrays[k] for k in ("feature", "threshold", "left", "right", "value"))
        model.trees_ = [[] for _ in range(model.n_outputs_)]
        for t, h in enumerate(horizon_of):
            lo, hi = starts[t], starts[t + 1]
            model.trees_[h].append(tuple(a[lo:hi] for a in flat))
        model.train_loss_ = model.eval_loss_ = None
        model._flat, model._starts, model._horizon_of = flat, starts, horizon_of
        return model


def fit_gbt(design, n_rounds=200, max_depth=6, learning_rate=0.1, min_samples_leaf=5, **kwargs):
    """Fit a :class:`GbtModel` on a design matrix."""
    return GbtModel(n_rounds, max_depth, learning_rate, min_samples_leaf, **kwargs).fit(design.X, design.Y)
