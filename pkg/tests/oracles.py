"""Independent reference implementations used as test oracles.

Nothing here imports the code paths it is used to check.
"""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction


def alg1_reference(H, n_s, n_e, max_hop):
    """Line-by-line interpreter of the history search pseudocode.

    ``H`` is a list of ``(n, u)`` tuples; indices run 1..|H| as written.
    ``max_hop=None`` means unlimited. Returns ``(P, h, inner_visits)``.
    """
    size = len(H)
    at = lambda i: H[i - 1]  # 1-based
    P, h = [], 0
    inner = 0
    i = 1
    while i <= size:                                   # for i = 1 to |H|
        if at(i)[0] == n_s:                            # if H[i].n = n_s
            current_user = at(i)[1]
            cur, c = [n_s], 0
            j = i + 1
            while j <= size:                           # for j = i+1 to |H|
                inner += 1
                n_j, u_j = at(j)
                if u_j != current_user or n_j == n_s or (max_hop is not None and c >= max_hop):
                    break
                c = c + 1
                cur.append(n_j)
                if n_j == n_e:
                    P.append(list(cur))
                    h = h + 1
                    break
                j += 1
        i += 1
    return P, h, inner


def all_simple_path_lengths(adj, s, t):
    """Minimum length over every simple s-t path by exhaustive DFS; inf if none."""
    best = math.inf
    stack = [(s, 0.0, frozenset([s]))]
    while stack:
        node, length, visited = stack.pop()
        if node == t:
            best = min(best, length)
            continue
        for v, w in adj[node]:
            if v not in visited:
                stack.append((v, length + w, visited | {v}))
    return best


def scan_nearest(points, lat, lon, dist):
    best = None
    for i, (plat, plon) in enumerate(points):
        d = dist(lat, lon, plat, plon)
        if best is None or d < best[0]:
            best = (d, i)
    return best[1]


def rational_sum(hs):
    """Exact sum of 1/h over a sequence of divisors."""
    return sum((Fraction(1, h) for h in hs), Fraction(0))


def shortest_path_only_publish(paths, k):
    """Integer-count baseline anonymizer over precomputed node paths."""
    counts = Counter()
    for nodes in paths:
        for a, b in zip(nodes, nodes[1:]):
            counts[(min(a, b), max(a, b))] += 1
    return sorted(key for key, c in counts.items() if c >= k)
