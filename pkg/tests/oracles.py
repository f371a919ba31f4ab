"""Slow reference implementations used only by the tests."""
import math


def dtw_brute_force(x, y):
    """Minimum cost over every monotone warping path, by explicit enumeration."""
    n, m = len(x), len(y)
    best = math.inf

    def walk(i, j, cost):
        nonlocal best
        cost = cost + abs(x[i] - y[j])
        if i == n - 1 and j == m - 1:
            best = min(best, cost)
            return
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, cost)
        if i + 1 < n:
            walk(i + 1, j, cost)
        if j + 1 < m:
            walk(i, j + 1, cost)

    walk(0, 0, 0.0)
    return best


def count_paths(n, m):
    paths = 0

    def walk(i, j):
        nonlocal paths
        if i == n - 1 and j == m - 1:
            paths += 1
            return
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1)
        if i + 1 < n:
            walk(i + 1, j)
        if j + 1 < m:
            walk(i, j + 1)

    walk(0, 0)
    return paths


def linkage_naive(a, b):
    """Double loop over all row pairs; returns (min, avg, max)."""
    dists = []
    for x in a:
        for y in b:
            acc = 0.0
            for u, v in zip(x, y):
                d = u - v
                acc += d * d
            dists.append(math.sqrt(acc))
    return min(dists), math.fsum(dists) / len(dists), max(dists)
