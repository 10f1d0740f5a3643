"""Minimal Nelder-Mead simplex search.

Kept in-tree because the fitting loops evaluate tiny objectives millions
of times; a list-based simplex avoids per-iteration array overhead.  The
update rules are the textbook ones (reflect 1, expand 2, contract 1/2,
shrink 1/2) and the whole search is deterministic.
"""

from __future__ import annotations

_INF = float("inf")


def nelder_mead(
    f,
    x0,
    initial_simplex=None,
    maxiter: int = 500,
    xatol: float = 1e-4,
    fatol: float = 1e-8,
):
    """Minimize ``f`` from ``x0``; returns (best_x, best_f, iterations).

    Convergence requires both the simplex coordinate spread (against the
    best vertex) to fall below ``xatol`` and the value spread below
    ``fatol``.  Vertices with infinite values are handled like any other
    bad vertex, so objectives may return inf for infeasible points.
    """
    x0 = [float(v) for v in x0]
    n = len(x0)
    if n == 0:
        return x0, f(x0), 0
    if initial_simplex is not None:
        simplex = [[float(v) for v in row] for row in initial_simplex]
    else:
        simplex = [list(x0)]
        for i in range(n):
            vertex = list(x0)
            vertex[i] = vertex[i] * 1.05 if vertex[i] != 0.0 else 0.00025
            simplex.append(vertex)
    values = [f(v) for v in simplex]

    nit = 0
    while nit < maxiter:
        order = sorted(range(n + 1), key=lambda i: values[i])
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        best, worst = simplex[0], simplex[-1]

        spread = 0.0
        for vertex in simplex[1:]:
            for a, b in zip(vertex, best):
                d = a - b if a >= b else b - a
                if d > spread:
                    spread = d
        fspread = values[-1] - values[0] if values[-1] < _INF else _INF
        if spread <= xatol and fspread <= fatol:
            break
        nit += 1

        centroid = [0.0] * n
        for vertex in simplex[:-1]:
            for i in range(n):
                centroid[i] += vertex[i]
        for i in range(n):
            centroid[i] /= n

        reflected = [2.0 * centroid[i] - worst[i] for i in range(n)]
        fr = f(reflected)
        if fr < values[0]:
            expanded = [3.0 * centroid[i] - 2.0 * worst[i] for i in range(n)]
            fe = f(expanded)
            if fe < fr:
                simplex[-1], values[-1] = expanded, fe
            else:
                simplex[-1], values[-1] = reflected, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = reflected, fr
        else:
            if fr < values[-1]:
                contracted = [1.5 * centroid[i] - 0.5 * worst[i] for i in range(n)]
            else:
                contracted = [0.5 * centroid[i] + 0.5 * worst[i] for i in range(n)]
            fc = f(contracted)
            if fc < min(fr, values[-1]):
                simplex[-1], values[-1] = contracted, fc
            else:
                for j in range(1, n + 1):
                    simplex[j] = [0.5 * (simplex[j][i] + best[i]) for i in range(n)]
                    values[j] = f(simplex[j])

    order = sorted(range(n + 1), key=lambda i: values[i])
    return list(simplex[order[0]]), values[order[0]], nit
