"""Independent brute-force oracles.

Everything here recomputes results from first principles with naive loops
(quadratic or worse) and stays deliberately ignorant of the package's
internals: per-threshold recounts for AP, all-pairs comparisons for AUC,
nested-loop pair counting for the graph, linear scans for EdgeBank, and
set algebra for diagnostics. Tests compare the fast implementations
against these.
"""

import math


# --- metrics ---------------------------------------------------------------


def ap_bruteforce(scores, labels):
    """Recompute precision/recall at every distinct threshold, then sum
    precision * recall-increment walking thresholds from high to low."""
    pairs = list(zip(scores, labels))
    n_pos = sum(y for _, y in pairs)
    assert n_pos > 0
    thresholds = sorted({s for s, _ in pairs}, reverse=True)
    ap = 0.0
    r_prev = 0.0
    for th in thresholds:
        selected = [(s, y) for s, y in pairs if s >= th]
        tp = sum(y for _, y in selected)
        precision = tp / len(selected)
        recall = tp / n_pos
        ap += (recall - r_prev) * precision
        r_prev = recall
    return ap


def auc_bruteforce(scores, labels):
    """All positive/negative comparisons; ties count one half."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    assert pos and neg
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


# --- graph construction ----------------------------------------------------


def pair_counts_bruteforce(works):
    """Nested-loop recount of w_year(u, v) over (work.year, work.field_ids)."""
    counts = {}
    for work in works:
        fields = sorted(work.field_ids)
        for i in range(len(fields)):
            for j in range(i + 1, len(fields)):
                key = (fields[i], fields[j], work.year)
                counts[key] = counts.get(key, 0) + 1
    return counts


def binary_pairs_bruteforce(counts, t):
    return {(u, v) for (u, v, year) in counts if year == t}


def cumulative_pairs_bruteforce(counts, t):
    return {(u, v) for (u, v, year) in counts if year <= t}


def first_observation_bruteforce(counts, u, v):
    years = [year for (a, b, year) in counts if (a, b) == tuple(sorted((u, v)))]
    return min(years) if years else math.inf


def transitive_closure_bruteforce(parents, seeds):
    """Repeated expansion until fixpoint; parents maps id -> iterable of ids."""
    out = {s for s in seeds if s in parents}
    while True:
        grown = set(out)
        for node in out:
            for p in parents.get(node, ()):
                if p in parents:
                    grown.add(p)
        if grown == out:
            return out
        out = grown


def reachable_into_roots_bruteforce(parents, roots):
    """Exhaustive path search: which nodes reach one of ``roots`` via parents."""
    members = set()
    for node in parents:
        frontier = [node]
        visited = {node}
        while frontier:
            cur = frontier.pop()
            if cur in roots:
                members.add(node)
                break
            for p in parents.get(cur, ()):
                if p not in visited and p in parents:
                    visited.add(p)
                    frontier.append(p)
    return members


# --- EdgeBank --------------------------------------------------------------


def edgebank_bruteforce(stream, pair, t, mode, window=None):
    """Linear scan of (u, v, year) triples strictly before t."""
    u, v = sorted(pair)
    hit = 0
    for a, b, year in stream:
        if year >= t:
            continue
        if tuple(sorted((a, b))) != (u, v):
            continue
        if mode == "infinite":
            hit = 1
        elif year >= t - window:
            hit = 1
    return hit


# --- diagnostics -----------------------------------------------------------


def yearly_pairs(stream):
    by_year = {}
    for u, v, year in stream:
        by_year.setdefault(year, set()).add(tuple(sorted((u, v))))
    return by_year


def novelty_bruteforce(stream):
    by_year = yearly_pairs(stream)
    years = sorted(by_year)
    ratios = []
    for t in years[1:]:
        earlier = set()
        for s in years:
            if s < t:
                earlier |= by_year[s]
        pairs = by_year[t]
        if not pairs:
            continue
        new = len([p for p in pairs if p not in earlier])
        ratios.append(new / len(pairs))
    return sum(ratios) / len(ratios)


def tea_bruteforce(stream):
    by_year = yearly_pairs(stream)
    rows = []
    seen = set()
    for t in sorted(by_year):
        pairs = by_year[t]
        new = len([p for p in pairs if p not in seen])
        rows.append((t, new, len(pairs) - new))
        seen |= pairs
    return rows


def recurrence_surprise_bruteforce(train_pairs, test_pairs):
    recurrence = len(train_pairs & test_pairs) / len(train_pairs)
    surprise = len(test_pairs - train_pairs) / len(test_pairs)
    return recurrence, surprise


def local_clustering_bruteforce(pairs, node):
    adj = {}
    for u, v in pairs:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    nbrs = sorted(adj.get(node, ()))
    if len(nbrs) < 2:
        return 0.0
    closed = 0
    total = 0
    for i in range(len(nbrs)):
        for j in range(i + 1, len(nbrs)):
            total += 1
            if nbrs[j] in adj[nbrs[i]]:
                closed += 1
    return closed / total


def components_bruteforce(pairs):
    nodes = sorted({n for p in pairs for n in p})
    comp_of = {}
    for node in nodes:
        if node in comp_of:
            continue
        group = {node}
        changed = True
        while changed:
            changed = False
            for u, v in pairs:
                if u in group and v not in group:
                    group.add(v)
                    changed = True
                if v in group and u not in group:
                    group.add(u)
                    changed = True
        for m in group:
            comp_of[m] = node
    comps = {}
    for m, root in comp_of.items():
        comps.setdefault(root, set()).add(m)
    return list(comps.values())


def diameter_bruteforce(pairs):
    """Floyd-Warshall over the largest component."""
    comps = components_bruteforce(pairs)
    if not comps:
        return None
    largest = max(comps, key=len)
    nodes = sorted(largest)
    idx = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    INF = float("inf")
    dist = [[0 if i == j else INF for j in range(n)] for i in range(n)]
    for u, v in pairs:
        if u in idx and v in idx:
            dist[idx[u]][idx[v]] = 1
            dist[idx[v]][idx[u]] = 1
    for k in range(n):
        for i in range(n):
            dik = dist[i][k]
            if dik == INF:
                continue
            for j in range(n):
                alt = dik + dist[k][j]
                if alt < dist[i][j]:
                    dist[i][j] = alt
    return max(max(row) for row in dist)


def assortativity_bruteforce(pairs):
    """Pearson over both orientations, textbook sums."""
    deg = {}
    for u, v in pairs:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    xs, ys = [], []
    for u, v in pairs:
        xs += [deg[u], deg[v]]
        ys += [deg[v], deg[u]]
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / n
    vx = sum((x - mx) ** 2 for x in xs) / n
    vy = sum((y - my) ** 2 for y in ys) / n
    if vx == 0 or vy == 0:
        return None
    return cov / math.sqrt(vx * vy)


# --- misc ------------------------------------------------------------------


def softmax_bruteforce(logits):
    mx = max(logits)
    ws = [math.exp(x - mx) for x in logits]
    total = sum(ws)
    return [w / total for w in ws]


def pca_eigh_bruteforce(X):
    """Eigendecomposition of the sample covariance matrix via numpy.linalg.eigh
    (a different code path than the SVD the implementation uses)."""
    import numpy as np

    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / (X.shape[0] - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    return evals[order], evecs[:, order], mean
