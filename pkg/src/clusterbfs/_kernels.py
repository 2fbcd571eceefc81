"""Compiled inner loops. Everything here works on raw numpy arrays.

Functions marked ``nogil`` are safe to run from several Python threads at
once as long as callers hand them disjoint output regions.
"""

import numpy as np
from numba import njit

INF16 = 0xFFFF
UNREACH = 2**31 - 1
DELTA_SATURATED = 254
DELTA_NONE = 255

_ONE = np.uint64(1)


# --------------------------------------------------------------------------
# cluster-BFS
# --------------------------------------------------------------------------

@njit(nogil=True, cache=True, inline="always")
def _is_full(nxt, v, full):
    for w in range(full.size):
        if nxt[v, w] != full[w]:
            return False
    return True


@njit(nogil=True, cache=True, inline="always")
def _accumulate(acc, seen, u, nxt, v, full):
    """acc |= seen[u]; True once acc | nxt[v] covers every source."""
    done = True
    for w in range(full.size):
        acc[w] |= seen[u, w]
        if (acc[w] | nxt[v, w]) != full[w]:
            done = False
    return done


@njit(nogil=True, cache=True)
def cbfs_serial(out_off, out_tgt, in_off, in_tgt, sources, d, full, dense_frac, force_mode):
    nwords = full.size
    n = out_off.size - 1
    m = out_tgt.size
    seen = np.zeros((n, nwords), np.uint64)
    nxt = np.zeros((n, nwords), np.uint64)
    delta = np.full(n, INF16, np.uint16)
    subsets = np.zeros((n, d + 1, nwords), np.uint64)
    claim = np.full(n, -1, np.int64)
    counts = np.zeros(n, np.int32)
    frontier = np.empty(max(n, 1), np.int32)
    nfront = np.empty(max(n, 1), np.int32)
    in_front = np.zeros(n, np.bool_)
    acc = np.zeros(nwords, np.uint64)
    fsizes = np.zeros(n + d + 2, np.int64)
    modes = np.zeros(n + d + 2, np.int8)

    fsize = 0
    for j in range(sources.size):
        s = sources[j]
        nxt[s, j >> 6] |= _ONE << np.uint64(j & 63)
        frontier[fsize] = s
        fsize += 1

    i = 0
    while fsize > 0:
        fsizes[i] = fsize
        work = fsize
        # stage 1: fold newly arrived sources into S_u[i - delta_u]
        for idx in range(fsize):
            u = frontier[idx]
            if delta[u] == INF16:
                delta[u] = i
            lvl = i - np.int64(delta[u])
            counts[u] += 1
            for w in range(nwords):
                new = nxt[u, w] & ~seen[u, w]
                subsets[u, lvl, w] = new
                seen[u, w] |= new
            work += out_off[u + 1] - out_off[u]

        if force_mode == 0:
            dense = work > m * dense_frac
        else:
            dense = force_mode == 2

        nsize = 0
        if not dense:
            modes[i] = 1
            for idx in range(fsize):
                u = frontier[idx]
                for e in range(out_off[u], out_off[u + 1]):
                    v = out_tgt[e]
                    dv = delta[v]
                    if dv != INF16 and i - np.int64(dv) >= d:
                        continue
                    changed = False
                    for w in range(nwords):
                        old = nxt[v, w]
                        nw = old | seen[u, w]
                        if nw != old:
                            nxt[v, w] = nw
                            changed = True
                    if changed and claim[v] != i:
                        claim[v] = i
                        nfront[nsize] = v
                        nsize += 1
        else:
            modes[i] = 2
            for idx in range(fsize):
                in_front[frontier[idx]] = True
            for v in range(n):
                dv = delta[v]
                if dv != INF16 and i - np.int64(dv) >= d:
                    continue
                if _is_full(nxt, v, full):
                    continue
                hit = False
                for w in range(nwords):
                    acc[w] = 0
                # each in-frontier neighbor may carry different sources, so keep
                # OR-ing until the union can no longer grow
                for e in range(in_off[v], in_off[v + 1]):
                    u = in_tgt[e]
                    if in_front[u]:
                        hit = True
                        if _accumulate(acc, seen, u, nxt, v, full):
                            break
                if hit:
                    changed = False
                    for w in range(nwords):
                        old = nxt[v, w]
                        nw = old | acc[w]
                        if nw != old:
                            nxt[v, w] = nw
                            changed = True
                    if changed:
                        claim[v] = i
                        nfront[nsize] = v
                        nsize += 1
            for idx in range(fsize):
                in_front[frontier[idx]] = False

        frontier, nfront = nfront, frontier
        fsize = nsize
        i += 1
    return delta, subsets, counts, fsizes[:i].copy(), modes[:i].copy()


@njit(nogil=True, cache=True)
def cbfs_serial_1w(out_off, out_tgt, in_off, in_tgt, sources, d, full, dense_frac, force_mode):
    """``cbfs_serial`` for clusters of at most 64 sources (one word per set)."""
    full = full[0]
    n = out_off.size - 1
    m = out_tgt.size
    seen = np.zeros(n, np.uint64)
    nxt = np.zeros(n, np.uint64)
    delta = np.full(n, INF16, np.uint16)
    subsets = np.zeros((n, d + 1), np.uint64)
    claim = np.full(n, -1, np.int64)
    counts = np.zeros(n, np.int32)
    frontier = np.empty(max(n, 1), np.int32)
    nfront = np.empty(max(n, 1), np.int32)
    in_front = np.zeros(n, np.bool_)
    fsizes = np.zeros(n + d + 2, np.int64)
    modes = np.zeros(n + d + 2, np.int8)

    fsize = 0
    for j in range(sources.size):
        s = sources[j]
        nxt[s] |= _ONE << np.uint64(j)
        frontier[fsize] = s
        fsize += 1

    i = 0
    while fsize > 0:
        fsizes[i] = fsize
        work = fsize
        for idx in range(fsize):
            u = frontier[idx]
            if delta[u] == INF16:
                delta[u] = i
            new = nxt[u] & ~seen[u]
            subsets[u, i - np.int64(delta[u])] = new
            seen[u] |= new
            counts[u] += 1
            work += out_off[u + 1] - out_off[u]

        if force_mode == 0:
            dense = work > m * dense_frac
        else:
            dense = force_mode == 2

        nsize = 0
        if not dense:
            modes[i] = 1
            for idx in range(fsize):
                u = frontier[idx]
                su = seen[u]
                for e in range(out_off[u], out_off[u + 1]):
                    v = out_tgt[e]
                    dv = delta[v]
                    if dv != INF16 and i - np.int64(dv) >= d:
                        continue
                    old = nxt[v]
                    nw = old | su
                    if nw != old:
                        nxt[v] = nw
                        if claim[v] != i:
                            claim[v] = i
                            nfront[nsize] = v
                            nsize += 1
        else:
            modes[i] = 2
            for idx in range(fsize):
                in_front[frontier[idx]] = True
            for v in range(n):
                dv = delta[v]
                if dv != INF16 and i - np.int64(dv) >= d:
                    continue
                old = nxt[v]
                if old == full:
                    continue
                acc = old
                for e in range(in_off[v], in_off[v + 1]):
                    u = in_tgt[e]
                    if in_front[u]:
                        acc |= seen[u]
                        if acc == full:
                            break
                if acc != old:
                    nxt[v] = acc
                    claim[v] = i
                    nfront[nsize] = v
                    nsize += 1
            for idx in range(fsize):
                in_front[frontier[idx]] = False

        frontier, nfront = nfront, frontier
        fsize = nsize
        i += 1
    return delta, subsets.reshape(n, d + 1, 1), counts, fsizes[:i].copy(), modes[:i].copy()


@njit(nogil=True, cache=True)
def cbfs_fold(frontier, i, nxt, seen, delta, subsets, counts, out_off):
    """Stage 1 for a slice of the frontier. Returns the slice's out-degree sum."""
    nwords = seen.shape[1]
    work = 0
    for idx in range(frontier.size):
        u = frontier[idx]
        if delta[u] == INF16:
            delta[u] = i
        lvl = i - np.int64(delta[u])
        counts[u] += 1
        for w in range(nwords):
            new = nxt[u, w] & ~seen[u, w]
            subsets[u, lvl, w] = new
            seen[u, w] |= new
        work += out_off[u + 1] - out_off[u]
    return work


@njit(nogil=True, cache=True)
def cbfs_emit(frontier, i, d, out_off, out_tgt, delta, nparts, n):
    """Sparse stage 2, part A: collect passing arcs bucketed by target owner.

    Returns (bucket offsets, targets, sources); bucket ``t`` holds arcs whose
    target lies in the ``t``-th contiguous vertex range.
    """
    total = 0
    for idx in range(frontier.size):
        u = frontier[idx]
        total += out_off[u + 1] - out_off[u]
    tmp_v = np.empty(total, np.int32)
    tmp_u = np.empty(total, np.int32)
    counts = np.zeros(nparts + 1, np.int64)
    cnt = 0
    for idx in range(frontier.size):
        u = frontier[idx]
        for e in range(out_off[u], out_off[u + 1]):
            v = out_tgt[e]
            dv = delta[v]
            if dv != INF16 and i - np.int64(dv) >= d:
                continue
            tmp_v[cnt] = v
            tmp_u[cnt] = u
            cnt += 1
            counts[(np.int64(v) * nparts) // n + 1] += 1
    offs = np.cumsum(counts)
    cursor = offs[:-1].copy()
    out_v = np.empty(cnt, np.int32)
    out_u = np.empty(cnt, np.int32)
    for a in range(cnt):
        t = (np.int64(tmp_v[a]) * nparts) // n
        p = cursor[t]
        out_v[p] = tmp_v[a]
        out_u[p] = tmp_u[a]
        cursor[t] = p + 1
    return offs, out_v, out_u


@njit(nogil=True, cache=True)
def cbfs_apply(vs, us, i, nxt, seen, claim):
    """Sparse stage 2, part B: OR source sets into owned targets and claim them."""
    nwords = seen.shape[1]
    out = np.empty(vs.size, np.int32)
    cnt = 0
    for a in range(vs.size):
        v = vs[a]
        u = us[a]
        changed = False
        for w in range(nwords):
            old = nxt[v, w]
            nw = old | seen[u, w]
            if nw != old:
                nxt[v, w] = nw
                changed = True
        if changed and claim[v] != i:
            claim[v] = i
            out[cnt] = v
            cnt += 1
    return out[:cnt].copy()


@njit(nogil=True, cache=True)
def cbfs_dense(lo, hi, i, d, in_off, in_tgt, in_front, delta, seen, nxt, claim, full):
    """Dense stage 2 for vertices ``lo..hi-1`` (pull from in-frontier neighbors)."""
    nwords = seen.shape[1]
    acc = np.zeros(nwords, np.uint64)
    out = np.empty(hi - lo, np.int32)
    cnt = 0
    for v in range(lo, hi):
        dv = delta[v]
        if dv != INF16 and i - np.int64(dv) >= d:
            continue
        if _is_full(nxt, v, full):
            continue
        hit = False
        for w in range(nwords):
            acc[w] = 0
        for e in range(in_off[v], in_off[v + 1]):
            u = in_tgt[e]
            if in_front[u]:
                hit = True
                if _accumulate(acc, seen, u, nxt, v, full):
                    break
        if hit:
            changed = False
            for w in range(nwords):
                old = nxt[v, w]
                nw = old | acc[w]
                if nw != old:
                    nxt[v, w] = nw
                    changed = True
            if changed:
                claim[v] = i
                out[cnt] = v
                cnt += 1
    return out[:cnt].copy()


# --------------------------------------------------------------------------
# single-source BFS
# --------------------------------------------------------------------------

@njit(nogil=True, cache=True)
def bfs_serial(out_off, out_tgt, in_off, in_tgt, s, dense_frac):
    n = out_off.size - 1
    m = out_tgt.size
    dist = np.full(n, UNREACH, np.int32)
    frontier = np.empty(max(n, 1), np.int32)
    nfront = np.empty(max(n, 1), np.int32)
    in_front = np.zeros(n, np.bool_)
    dist[s] = 0
    frontier[0] = s
    fsize = 1
    i = 0
    while fsize > 0:
        work = fsize
        for idx in range(fsize):
            u = frontier[idx]
            work += out_off[u + 1] - out_off[u]
        nsize = 0
        if work > m * dense_frac:
            for idx in range(fsize):
                in_front[frontier[idx]] = True
            for v in range(n):
                if dist[v] != UNREACH:
                    continue
                for e in range(in_off[v], in_off[v + 1]):
                    if in_front[in_tgt[e]]:
                        dist[v] = i + 1
                        nfront[nsize] = v
                        nsize += 1
                        break
            for idx in range(fsize):
                in_front[frontier[idx]] = False
        else:
            for idx in range(fsize):
                u = frontier[idx]
                for e in range(out_off[u], out_off[u + 1]):
                    v = out_tgt[e]
                    if dist[v] == UNREACH:
                        dist[v] = i + 1
                        nfront[nsize] = v
                        nsize += 1
        frontier, nfront = nfront, frontier
        fsize = nsize
        i += 1
    return dist


@njit(nogil=True, cache=True)
def bfs_limited(out_off, out_tgt, s, limit):
    """Queue BFS that stops expanding at depth ``limit``."""
    n = out_off.size - 1
    dist = np.full(n, UNREACH, np.int32)
    queue = np.empty(max(n, 1), np.int32)
    dist[s] = 0
    queue[0] = s
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        if du >= limit:
            continue
        for e in range(out_off[u], out_off[u + 1]):
            v = out_tgt[e]
            if dist[v] == UNREACH:
                dist[v] = du + 1
                queue[tail] = v
                tail += 1
    return dist


# --------------------------------------------------------------------------
# landmark index queries over the serialized byte layout
# --------------------------------------------------------------------------

@njit(nogil=True, cache=True)
def load_levels(records, x, off, d, nb, k, buf):
    """Copy vertex ``x``'s stored subsets into ``buf`` and rebuild level ``d``."""
    for b in range(nb):
        acc = np.int64(0)
        for lv in range(d):
            byte = np.int64(records[x, off + 1 + lv * nb + b])
            buf[lv, b] = byte
            acc |= byte
        full = np.int64(0xFF)
        if b == nb - 1 and k % 8 != 0:
            full = (np.int64(1) << (k % 8)) - 1
        buf[d, b] = full & ~acc


@njit(nogil=True, cache=True)
def scan_levels(bu, bv, d, nb):
    """Smallest i+j with S_u[i] & S_v[j] nonempty, and the lowest shared source.

    Returns (-1, -1) when the two vectors share no source.
    """
    for t in range(2 * d + 1):
        lo = t - d if t > d else 0
        hi = t if t < d else d
        for a in range(lo, hi + 1):
            c = t - a
            for b in range(nb):
                x = np.int64(bu[a, b]) & np.int64(bv[c, b])
                if x != 0:
                    bit = 0
                    while (x >> bit) & 1 == 0:
                        bit += 1
                    return t, b * 8 + bit
    return -1, -1


@njit(nogil=True, cache=True)
def ll_query_pairs(records, offs, ds, nbs, ks, us, vs, which):
    """Min over clusters of the best source-mediated distance.

    ``which`` < 0 means every cluster; otherwise only that cluster is used.
    """
    r = offs.size
    dmax = 0
    nbmax = 1
    for c in range(r):
        dmax = max(dmax, ds[c])
        nbmax = max(nbmax, nbs[c])
    bu = np.zeros((dmax + 1, nbmax), np.int64)
    bv = np.zeros((dmax + 1, nbmax), np.int64)
    est = np.full(us.size, UNREACH, np.int64)
    wc = np.full(us.size, -1, np.int64)
    wsrc = np.full(us.size, -1, np.int64)
    for p in range(us.size):
        u = us[p]
        v = vs[p]
        best = np.int64(UNREACH)
        for c in range(r):
            if which >= 0 and c != which:
                continue
            off = offs[c]
            du = np.int64(records[u, off])
            dv = np.int64(records[v, off])
            if du >= DELTA_SATURATED or dv >= DELTA_SATURATED:
                continue
            if du + dv >= best:
                continue
            load_levels(records, u, off, ds[c], nbs[c], ks[c], bu)
            load_levels(records, v, off, ds[c], nbs[c], ks[c], bv)
            t, src = scan_levels(bu, bv, ds[c], nbs[c])
            if t >= 0 and du + dv + t < best:
                best = du + dv + t
                wc[p] = c
                wsrc[p] = src
        est[p] = best
    return est, wc, wsrc


# --------------------------------------------------------------------------
# bidirectional local search
# --------------------------------------------------------------------------

@njit(nogil=True, cache=True)
def bidir_search(out_off, out_tgt, u, v, tau, dist_u, dist_v, qu, qv):
    """Expand up to ``tau`` vertices from each side, smaller queue first.

    ``dist_u``/``dist_v`` must be all -1 on entry and are restored on exit.
    """
    if tau <= 0:
        return np.int64(UNREACH)
    best = np.int64(UNREACH)
    dist_u[u] = 0
    qu[0] = u
    hu, tu, eu = 0, 1, 0
    dist_v[v] = 0
    qv[0] = v
    hv, tv, ev = 0, 1, 0
    if u == v:
        best = 0
    while True:
        can_u = eu < tau and hu < tu
        can_v = ev < tau and hv < tv
        if not can_u and not can_v:
            break
        if can_u and (not can_v or (tu - hu) <= (tv - hv)):
            x = qu[hu]
            hu += 1
            eu += 1
            for e in range(out_off[x], out_off[x + 1]):
                y = out_tgt[e]
                if dist_u[y] < 0:
                    dist_u[y] = dist_u[x] + 1
                    qu[tu] = y
                    tu += 1
                    if dist_v[y] >= 0 and dist_u[y] + dist_v[y] < best:
                        best = dist_u[y] + dist_v[y]
        else:
            x = qv[hv]
            hv += 1
            ev += 1
            for e in range(out_off[x], out_off[x + 1]):
                y = out_tgt[e]
                if dist_v[y] < 0:
                    dist_v[y] = dist_v[x] + 1
                    qv[tv] = y
                    tv += 1
                    if dist_u[y] >= 0 and dist_u[y] + dist_v[y] < best:
                        best = dist_u[y] + dist_v[y]
    for a in range(tu):
        dist_u[qu[a]] = -1
    for a in range(tv):
        dist_v[qv[a]] = -1
    return best


@njit(nogil=True, cache=True)
def bidir_pairs(out_off, out_tgt, us, vs, tau):
    n = out_off.size - 1
    dist_u = np.full(n, -1, np.int32)
    dist_v = np.full(n, -1, np.int32)
    qu = np.empty(max(n, 1), np.int32)
    qv = np.empty(max(n, 1), np.int32)
    out = np.empty(us.size, np.int64)
    for p in range(us.size):
        out[p] = bidir_search(out_off, out_tgt, us[p], vs[p], tau, dist_u, dist_v, qu, qv)
    return out


# --------------------------------------------------------------------------
# pruned landmark labeling
# --------------------------------------------------------------------------

@njit(nogil=True, cache=True)
def pruned_bfs(out_off, out_tgt, h, lab_off, lab_hub, lab_dist,
               records, offs, ds, nbs, ks, prio, hub_tmp, dist_ws, shadow, queue, out_v, out_d):
    """BFS from ``h`` that skips vertices the committed index already answers.

    A vertex is also left unlabeled when some shortest path from ``h`` to it
    passes a vertex with ``prio`` below ``prio[h]``; such vertices are still
    expanded so the mark reaches everything behind them. All-zero ``prio``
    disables this. ``shadow`` must be all False on entry and is restored.

    ``hub_tmp`` (indexed by rank) must be UNREACH and ``dist_ws`` -1 on entry;
    both are restored. Writes label additions to ``out_v``/``out_d`` and
    returns how many were written.
    """
    r = offs.size
    dmax = 0
    nbmax = 1
    for c in range(r):
        dmax = max(dmax, ds[c])
        nbmax = max(nbmax, nbs[c])
    hbuf = np.zeros((r, dmax + 1, nbmax), np.int64)
    hdelta = np.empty(r, np.int64)
    ubuf = np.zeros((dmax + 1, nbmax), np.int64)
    for c in range(r):
        hdelta[c] = records[h, offs[c]]
        if hdelta[c] < DELTA_SATURATED:
            load_levels(records, h, offs[c], ds[c], nbs[c], ks[c], hbuf[c])
    for e in range(lab_off[h], lab_off[h + 1]):
        hub_tmp[lab_hub[e]] = lab_dist[e]

    dist_ws[h] = 0
    queue[0] = h
    head = 0
    tail = 1
    cnt = 0
    while head < tail:
        u = queue[head]
        head += 1
        du = np.int64(dist_ws[u])
        shadowed = False
        if u != h:
            pruned = False
            for e in range(lab_off[u], lab_off[u + 1]):
                t = np.int64(hub_tmp[lab_hub[e]])
                if t != UNREACH and t + lab_dist[e] <= du:
                    pruned = True
                    break
            if not pruned:
                for c in range(r):
                    dh = hdelta[c]
                    dx = np.int64(records[u, offs[c]])
                    if dh >= DELTA_SATURATED or dx >= DELTA_SATURATED or dh + dx > du:
                        continue
                    load_levels(records, u, offs[c], ds[c], nbs[c], ks[c], ubuf)
                    t, _ = scan_levels(hbuf[c], ubuf, ds[c], nbs[c])
                    if t >= 0 and dh + dx + t <= du:
                        pruned = True
                        break
            if pruned:
                continue
            # some shortest path from h runs through a vertex that outranks h
            shadowed = shadow[u] or prio[u] < prio[h]
        if not shadowed:
            out_v[cnt] = u
            out_d[cnt] = du
            cnt += 1
        for e in range(out_off[u], out_off[u + 1]):
            w = out_tgt[e]
            if dist_ws[w] < 0:
                dist_ws[w] = du + 1
                queue[tail] = w
                tail += 1
                shadow[w] = shadowed
            elif shadowed and dist_ws[w] == du + 1:
                shadow[w] = True

    for a in range(tail):
        dist_ws[queue[a]] = -1
        shadow[queue[a]] = False
    for e in range(lab_off[h], lab_off[h + 1]):
        hub_tmp[lab_hub[e]] = UNREACH
    return cnt


@njit(cache=True)
def commit_labels(lab_off, lab_hub, lab_dist, add_v, add_d, add_rank):
    """Append additions (ordered by increasing rank) to the label CSR."""
    n = lab_off.size - 1
    cnt = np.zeros(n, np.int64)
    for v in range(n):
        cnt[v] = lab_off[v + 1] - lab_off[v]
    for a in range(add_v.size):
        cnt[add_v[a]] += 1
    new_off = np.zeros(n + 1, np.int64)
    for v in range(n):
        new_off[v + 1] = new_off[v] + cnt[v]
    new_hub = np.empty(new_off[n], np.uint32)
    new_dist = np.empty(new_off[n], np.uint16)
    cursor = np.empty(n, np.int64)
    for v in range(n):
        p = new_off[v]
        for e in range(lab_off[v], lab_off[v + 1]):
            new_hub[p] = lab_hub[e]
            new_dist[p] = lab_dist[e]
            p += 1
        cursor[v] = p
    for a in range(add_v.size):
        v = add_v[a]
        p = cursor[v]
        new_hub[p] = add_rank[a]
        new_dist[p] = add_d[a]
        cursor[v] = p + 1
    return new_off, new_hub, new_dist


@njit(nogil=True, cache=True)
def hub_query_pairs(lab_off, lab_hub, lab_dist, us, vs):
    """Merge-intersect sorted hub lists; UNREACH when no hub is shared."""
    out = np.full(us.size, UNREACH, np.int64)
    for p in range(us.size):
        a = lab_off[us[p]]
        ae = lab_off[us[p] + 1]
        b = lab_off[vs[p]]
        be = lab_off[vs[p] + 1]
        best = np.int64(UNREACH)
        while a < ae and b < be:
            ha = lab_hub[a]
            hb = lab_hub[b]
            if ha == hb:
                s = np.int64(lab_dist[a]) + np.int64(lab_dist[b])
                if s < best:
                    best = s
                a += 1
                b += 1
            elif ha < hb:
                a += 1
            else:
                b += 1
        out[p] = best
    return out
