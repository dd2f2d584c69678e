"""Compiled inner loops for the ant system.

Every function here works on the raw slot arrays owned by DynamicGraph and
the engine. The Python-level operations in ``colony`` call the same
functions, so the per-ant path and the batched step share one arithmetic.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _pw(x, p):
    if p == 1.0:
        return x
    if p == 2.0:
        return x * x
    if p == 0.0:
        return 1.0
    return x ** p


@njit(cache=True)
def attractiveness(w, pher, eslot, cslot, alpha, beta, gamma, eps):
    own = pher[eslot, cslot]
    foreign = 0.0
    for k in range(pher.shape[1]):
        if k != cslot:
            foreign += pher[eslot, k]
    return _pw(w[eslot], beta) * _pw(eps + own, alpha) / _pw(eps + foreign, gamma)


@njit(cache=True)
def choose(indptr, adj_e, adj_nbr_id, w, pher, loc, tabu_row, cslot, u,
           alpha, beta, gamma, eps, cand, cand_a):
    """Roulette-wheel pick among the incident edges of vertex slot ``loc``.

    Returns a position into the adjacency arrays, or -1 when stuck.
    ``cand``/``cand_a`` are scratch buffers at least as long as the degree.
    """
    start = indptr[loc]
    end = indptr[loc + 1]
    if start == end:
        return -1
    n = 0
    total = 0.0
    for i in range(start, end):
        nid = adj_nbr_id[i]
        blocked = False
        for t in range(tabu_row.shape[0]):
            if tabu_row[t] == nid:
                blocked = True
                break
        if not blocked:
            a = attractiveness(w, pher, adj_e[i], cslot, alpha, beta, gamma, eps)
            cand[n] = i
            cand_a[n] = a
            total += a
            n += 1
    if n == 0:
        for i in range(start, end):
            a = attractiveness(w, pher, adj_e[i], cslot, alpha, beta, gamma, eps)
            cand[n] = i
            cand_a[n] = a
            total += a
            n += 1
    if not total > 0.0:
        return -1
    r = u * total
    acc = 0.0
    last = -1
    for j in range(n):
        a = cand_a[j]
        if a > 0.0:
            acc += a
            last = cand[j]
            if r < acc:
                return cand[j]
    return last


@njit(cache=True)
def push_tabu(tabu_row, vid):
    m = tabu_row.shape[0]
    if m == 0:
        return
    for t in range(m - 1):
        tabu_row[t] = tabu_row[t + 1]
    tabu_row[m - 1] = vid


@njit(cache=True)
def move_ants(indptr, adj_e, adj_nbr, adj_nbr_id, w, pher, live_v,
              ant_col, ant_loc, tabu, draws, q, deposit,
              alpha, beta, gamma, eps):
    """Move every ant once, in array order, depositing as they go.

    Returns the number of ants that were stuck and teleported.
    """
    max_deg = 0
    for v in range(indptr.shape[0] - 1):
        d = indptr[v + 1] - indptr[v]
        if d > max_deg:
            max_deg = d
    cand = np.empty(max_deg + 1, dtype=np.int64)
    cand_a = np.empty(max_deg + 1, dtype=np.float64)
    n_live = live_v.shape[0]
    stuck = 0
    for k in range(ant_loc.shape[0]):
        i = choose(indptr, adj_e, adj_nbr_id, w, pher, ant_loc[k], tabu[k],
                   ant_col[k], draws[k, 0], alpha, beta, gamma, eps, cand, cand_a)
        if i < 0:
            j = int(draws[k, 1] * n_live)
            if j >= n_live:
                j = n_live - 1
            ant_loc[k] = live_v[j]
            tabu[k, :] = -1
            stuck += 1
        else:
            if deposit:
                pher[adj_e[i], ant_col[k]] += q
            ant_loc[k] = adj_nbr[i]
            push_tabu(tabu[k], adj_nbr_id[i])
    return stuck


@njit(cache=True)
def incident_sums(indptr, adj_e, pher, v, live_c, out):
    for c in live_c:
        out[c] = 0.0
    for i in range(indptr[v], indptr[v + 1]):
        e = adj_e[i]
        for c in live_c:
            out[c] += pher[e, c]


@njit(cache=True)
def dominant(sums, live_c, current):
    """Color slot with the largest sum; keeps ``current`` on ties or no evidence."""
    best = -1
    best_val = 0.0
    for c in live_c:
        if sums[c] > best_val:
            best = c
            best_val = sums[c]
    if best == -1:
        return current
    if current >= 0 and sums[current] == best_val:
        return current
    return best


@njit(cache=True)
def recolor(indptr, adj_e, pher, live_v, live_c, v_color, v_streak):
    sums = np.zeros(pher.shape[1])
    changed = 0
    for v in live_v:
        incident_sums(indptr, adj_e, pher, v, live_c, sums)
        cur = v_color[v]
        new = dominant(sums, live_c, cur)
        if new < 0:
            v_streak[v] = 0
        elif new == cur:
            v_streak[v] += 1
        else:
            v_streak[v] = 1
            changed += 1
        v_color[v] = new
    return changed


@njit(cache=True)
def evaporate(pher, keep, phi_min):
    flat = pher.reshape(-1)
    for i in range(flat.shape[0]):
        x = flat[i] * keep
        flat[i] = 0.0 if x < phi_min else x


@njit(cache=True)
def build_csr(order, e_u, e_v, n_slots):
    """Counting sort of the edges in ``order`` (edge slots by edge id) by endpoint.

    Linear in vertices plus edges; each neighbor list comes out in edge id order.
    """
    indptr = np.zeros(n_slots + 1, dtype=np.int64)
    for e in order:
        indptr[e_u[e] + 1] += 1
        indptr[e_v[e] + 1] += 1
    for v in range(n_slots):
        indptr[v + 1] += indptr[v]
    fill = indptr[:-1].copy()
    adj_e = np.empty(2 * order.shape[0], dtype=np.int64)
    adj_nbr = np.empty(2 * order.shape[0], dtype=np.int64)
    for e in order:
        u = e_u[e]
        v = e_v[e]
        adj_e[fill[u]] = e
        adj_nbr[fill[u]] = v
        fill[u] += 1
        adj_e[fill[v]] = e
        adj_nbr[fill[v]] = u
        fill[v] += 1
    return indptr, adj_e, adj_nbr
