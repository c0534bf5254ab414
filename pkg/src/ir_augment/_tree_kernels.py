"""Compiled kernels for CART construction and routing.

The builder keeps one row-index array per feature, each sorted by that
feature's values; splits stably partition every per-feature segment, so no
re-sorting happens below the root. Work per level is O(n * p), which is what
makes the per-column synthesis and the bagged forests cheap enough to
benchmark.

Node layout is flat arrays. Nominal splits store left/right category sets as
64-bit masks, which caps nominal predictors at 64 categories (validated by
the wrapper).
"""

import numpy as np
from numba import njit

LEAF = -1
# sentinel for "no depth limit"
NO_DEPTH_LIMIT = 1 << 30


@njit(cache=True, inline="always")
def _next_rand(state):
    """splitmix64 step; state is a 1-element uint64 array."""
    state[0] += np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def build_tree(
    X,              # (n, p) float64, nominal columns hold category codes
    y,              # (n,) float64; class codes when target_is_class
    is_nom,         # (p,) uint8
    target_is_class,  # 0/1
    n_classes,      # >= 1 when target_is_class
    min_leaf,
    min_split,
    max_depth,
    m_features,     # features examined per node (<= p)
    seed,           # uint64 for the feature subsampler
    sorted_idx,     # (p, n) int64 row ids sorted per feature; mutated in place
):
    n, p = X.shape
    max_nodes = 2 * n + 1

    feature = np.full(max_nodes, LEAF, dtype=np.int64)
    thr = np.zeros(max_nodes, dtype=np.float64)
    is_cat_split = np.zeros(max_nodes, dtype=np.uint8)
    left_mask = np.zeros(max_nodes, dtype=np.uint64)
    right_mask = np.zeros(max_nodes, dtype=np.uint64)
    left_child = np.full(max_nodes, -1, dtype=np.int64)
    right_child = np.full(max_nodes, -1, dtype=np.int64)
    node_n = np.zeros(max_nodes, dtype=np.int64)
    node_start = np.zeros(max_nodes, dtype=np.int64)
    node_end = np.zeros(max_nodes, dtype=np.int64)
    node_depth = np.zeros(max_nodes, dtype=np.int64)
    pred = np.zeros(max_nodes, dtype=np.float64)
    gain_arr = np.zeros(max_nodes, dtype=np.float64)

    goes_left = np.zeros(n, dtype=np.uint8)
    tmp = np.empty(n, dtype=np.int64)

    # scratch for nominal predictors and class counting
    max_cats = 64
    cat_count = np.zeros(max_cats, dtype=np.int64)
    cat_sum = np.zeros(max_cats, dtype=np.float64)
    cat_sumsq = np.zeros(max_cats, dtype=np.float64)
    cat_order = np.empty(max_cats, dtype=np.int64)
    cat_key = np.empty(max_cats, dtype=np.float64)
    nc = n_classes if target_is_class == 1 else 1
    cat_class = np.zeros((max_cats, nc), dtype=np.int64)
    cls_total = np.zeros(nc, dtype=np.int64)
    cls_left = np.zeros(nc, dtype=np.int64)

    rng_state = np.empty(1, dtype=np.uint64)
    rng_state[0] = seed
    feat_pool = np.arange(p, dtype=np.int64)
    feats = np.empty(p, dtype=np.int64)

    # stack of node ids to process (ranges already recorded on the node)
    stack = np.empty(max_nodes, dtype=np.int64)
    top = 0
    node_count = 1
    node_start[0] = 0
    node_end[0] = n
    node_n[0] = n
    node_depth[0] = 0
    stack[top] = 0
    top += 1

    while top > 0:
        top -= 1
        node = stack[top]
        start = node_start[node]
        end = node_end[node]
        nn = end - start
        depth = node_depth[node]
        seg0 = sorted_idx[0, start:end]

        # parent statistics (and purity check)
        y_sum = 0.0
        y_min = np.inf
        y_max = -np.inf
        if target_is_class == 1:
            for c in range(nc):
                cls_total[c] = 0
            for i in range(nn):
                cls_total[int(y[seg0[i]])] += 1
        for i in range(nn):
            v = y[seg0[i]]
            y_sum += v
            if v < y_min:
                y_min = v
            if v > y_max:
                y_max = v
        y_mean = y_sum / nn

        if target_is_class == 1:
            best_c = 0
            best_cnt = -1
            for c in range(nc):
                if cls_total[c] > best_cnt:
                    best_cnt = cls_total[c]
                    best_c = c
            node_pred = float(best_c)
            pure = best_cnt == nn
        else:
            node_pred = y_mean
            pure = y_min == y_max

        pred[node] = node_pred

        if pure or nn < min_split or nn < 2 * min_leaf or depth >= max_depth or p == 0:
            continue

        # centered target stats keep the sums well conditioned
        z_sumsq = 0.0
        if target_is_class == 0:
            for i in range(nn):
                d = y[seg0[i]] - y_mean
                z_sumsq += d * d
        sp = 0.0  # sum of squared class counts, parent
        if target_is_class == 1:
            for c in range(nc):
                sp += float(cls_total[c]) * float(cls_total[c])

        # sample the features examined at this node
        m = m_features if m_features < p else p
        if m < p:
            for i in range(m):
                j = i + int(_next_rand(rng_state) % np.uint64(p - i))
                t = feat_pool[i]
                feat_pool[i] = feat_pool[j]
                feat_pool[j] = t
            for i in range(m):
                feats[i] = feat_pool[i]
            # ascending feature order keeps the equal-gain tie-break stable
            for i in range(1, m):
                fv = feats[i]
                w = i - 1
                while w >= 0 and feats[w] > fv:
                    feats[w + 1] = feats[w]
                    w -= 1
                feats[w + 1] = fv
        else:
            for i in range(p):
                feats[i] = i

        best_gain = 0.0
        best_f = -1
        best_thr = 0.0
        best_is_cat = 0
        best_lmask = np.uint64(0)
        best_rmask = np.uint64(0)

        for fi in range(m):
            f = feats[fi]
            seg = sorted_idx[f, start:end]
            if is_nom[f] == 0:
                # numeric scan over values sorted ascending
                if target_is_class == 0:
                    zs = 0.0
                    zq = 0.0
                    for i in range(1, nn):
                        prev = seg[i - 1]
                        d = y[prev] - y_mean
                        zs += d
                        zq += d * d
                        v_lo = X[prev, f]
                        v_hi = X[seg[i], f]
                        if v_lo == v_hi or i < min_leaf or nn - i < min_leaf:
                            continue
                        k = float(i)
                        rk = float(nn - i)
                        sse_l = zq - zs * zs / k
                        rs = 0.0 - zs  # total centered sum is ~0 by construction
                        rq = z_sumsq - zq
                        sse_r = rq - rs * rs / rk
                        g = z_sumsq - sse_l - sse_r
                        if g > best_gain:
                            t2 = 0.5 * v_lo + 0.5 * v_hi
                            if t2 >= v_hi:
                                t2 = v_lo
                            best_gain = g
                            best_f = f
                            best_thr = t2
                            best_is_cat = 0
                else:
                    for c in range(nc):
                        cls_left[c] = 0
                    sl = 0.0
                    sr = sp
                    for i in range(1, nn):
                        prev = seg[i - 1]
                        c = int(y[prev])
                        old_l = cls_left[c]
                        old_r = cls_total[c] - old_l
                        sl += 2.0 * old_l + 1.0
                        sr += -2.0 * old_r + 1.0
                        cls_left[c] = old_l + 1
                        v_lo = X[prev, f]
                        v_hi = X[seg[i], f]
                        if v_lo == v_hi or i < min_leaf or nn - i < min_leaf:
                            continue
                        k = float(i)
                        rk = float(nn - i)
                        g = sl / k + sr / rk - sp / float(nn)
                        if g > best_gain:
                            t2 = 0.5 * v_lo + 0.5 * v_hi
                            if t2 >= v_hi:
                                t2 = v_lo
                            best_gain = g
                            best_f = f
                            best_thr = t2
                            best_is_cat = 0
            else:
                # nominal predictor: accumulate per-category stats
                n_used = 0
                for i in range(nn):
                    row = seg[i]
                    code = int(X[row, f])
                    if cat_count[code] == 0:
                        cat_order[n_used] = code  # collect used codes
                        n_used += 1
                    cat_count[code] += 1
                    d = y[row] - y_mean
                    cat_sum[code] += d
                    cat_sumsq[code] += d * d
                    if target_is_class == 1:
                        cat_class[code, int(y[row])] += 1
                if n_used >= 2:
                    # deterministic base order: ascending code
                    for u in range(1, n_used):
                        cv = cat_order[u]
                        w = u - 1
                        while w >= 0 and cat_order[w] > cv:
                            cat_order[w + 1] = cat_order[w]
                            w -= 1
                        cat_order[w + 1] = cv
                    exhaustive = target_is_class == 1 and nc > 2 and n_used <= 8
                    if not exhaustive:
                        # order categories by mean target / first-class share
                        for u in range(n_used):
                            code = cat_order[u]
                            if target_is_class == 1:
                                cat_key[u] = float(cat_class[code, 0]) / float(cat_count[code])
                            else:
                                cat_key[u] = cat_sum[code] / float(cat_count[code])
                        # insertion sort of cat_order[:n_used] by key (stable)
                        for u in range(1, n_used):
                            kv = cat_key[u]
                            cv = cat_order[u]
                            w = u - 1
                            while w >= 0 and cat_key[w] > kv:
                                cat_key[w + 1] = cat_key[w]
                                cat_order[w + 1] = cat_order[w]
                                w -= 1
                            cat_key[w + 1] = kv
                            cat_order[w + 1] = cv
                        # ordered boundary scan
                        if target_is_class == 0:
                            zs = 0.0
                            zq = 0.0
                            cnt = 0
                            for u in range(n_used - 1):
                                code = cat_order[u]
                                zs += cat_sum[code]
                                zq += cat_sumsq[code]
                                cnt += cat_count[code]
                                if cnt < min_leaf or nn - cnt < min_leaf:
                                    continue
                                k = float(cnt)
                                rk = float(nn - cnt)
                                sse_l = zq - zs * zs / k
                                rs = 0.0 - zs
                                rq = z_sumsq - zq
                                sse_r = rq - rs * rs / rk
                                g = z_sumsq - sse_l - sse_r
                                if g > best_gain:
                                    lm = np.uint64(0)
                                    for w in range(u + 1):
                                        lm |= np.uint64(1) << np.uint64(cat_order[w])
                                    rm = np.uint64(0)
                                    for w in range(u + 1, n_used):
                                        rm |= np.uint64(1) << np.uint64(cat_order[w])
                                    best_gain = g
                                    best_f = f
                                    best_is_cat = 1
                                    best_lmask = lm
                                    best_rmask = rm
                        else:
                            for c in range(nc):
                                cls_left[c] = 0
                            sl = 0.0
                            sr = sp
                            cnt = 0
                            for u in range(n_used - 1):
                                code = cat_order[u]
                                for c in range(nc):
                                    add = cat_class[code, c]
                                    if add > 0:
                                        old_l = cls_left[c]
                                        old_r = cls_total[c] - old_l
                                        sl += 2.0 * old_l * add + float(add) * add
                                        sr += -2.0 * old_r * add + float(add) * add
                                        cls_left[c] = old_l + add
                                cnt += cat_count[code]
                                if cnt < min_leaf or nn - cnt < min_leaf:
                                    continue
                                g = sl / float(cnt) + sr / float(nn - cnt) - sp / float(nn)
                                if g > best_gain:
                                    lm = np.uint64(0)
                                    for w in range(u + 1):
                                        lm |= np.uint64(1) << np.uint64(cat_order[w])
                                    rm = np.uint64(0)
                                    for w in range(u + 1, n_used):
                                        rm |= np.uint64(1) << np.uint64(cat_order[w])
                                    best_gain = g
                                    best_f = f
                                    best_is_cat = 1
                                    best_lmask = lm
                                    best_rmask = rm
                    else:
                        # exhaustive subsets, lowest used code pinned to the left
                        n_masks = 1 << (n_used - 1)
                        for local in range(1, n_masks):
                            lmask_local = (local << 1) | 1
                            cnt = 0
                            sl = 0.0
                            sr = 0.0
                            for c in range(nc):
                                cls_left[c] = 0
                            for u in range(n_used):
                                if (lmask_local >> u) & 1 == 1:
                                    code = cat_order[u]
                                    cnt += cat_count[code]
                                    for c in range(nc):
                                        cls_left[c] += cat_class[code, c]
                            if cnt < min_leaf or nn - cnt < min_leaf or cnt == nn:
                                continue
                            for c in range(nc):
                                lcv = float(cls_left[c])
                                rcv = float(cls_total[c] - cls_left[c])
                                sl += lcv * lcv
                                sr += rcv * rcv
                            g = sl / float(cnt) + sr / float(nn - cnt) - sp / float(nn)
                            if g > best_gain:
                                lm = np.uint64(0)
                                rm = np.uint64(0)
                                for u in range(n_used):
                                    if (lmask_local >> u) & 1 == 1:
                                        lm |= np.uint64(1) << np.uint64(cat_order[u])
                                    else:
                                        rm |= np.uint64(1) << np.uint64(cat_order[u])
                                best_gain = g
                                best_f = f
                                best_is_cat = 1
                                best_lmask = lm
                                best_rmask = rm
                # reset scratch for the used codes only
                for u in range(n_used):
                    code = cat_order[u]
                    cat_count[code] = 0
                    cat_sum[code] = 0.0
                    cat_sumsq[code] = 0.0
                    if target_is_class == 1:
                        for c in range(nc):
                            cat_class[code, c] = 0

        if best_f < 0 or best_gain <= 0.0:
            continue

        # mark membership, then stably partition every feature segment
        n_left = 0
        for i in range(nn):
            row = seg0[i]
            if best_is_cat == 1:
                code = np.uint64(int(X[row, best_f]))
                side = (best_lmask >> code) & np.uint64(1)
                goes_left[row] = np.uint8(side)
            else:
                goes_left[row] = np.uint8(1) if X[row, best_f] <= best_thr else np.uint8(0)
            if goes_left[row] == 1:
                n_left += 1

        for f in range(p):
            seg = sorted_idx[f, start:end]
            wl = 0
            wr = 0
            for i in range(nn):
                row = seg[i]
                if goes_left[row] == 1:
                    tmp[wl] = row
                    wl += 1
                else:
                    tmp[n_left + wr] = row
                    wr += 1
            for i in range(nn):
                seg[i] = tmp[i]

        lid = node_count
        rid = node_count + 1
        node_count += 2
        feature[node] = best_f
        thr[node] = best_thr
        is_cat_split[node] = best_is_cat
        left_mask[node] = best_lmask
        right_mask[node] = best_rmask
        left_child[node] = lid
        right_child[node] = rid
        gain_arr[node] = best_gain

        node_start[lid] = start
        node_end[lid] = start + n_left
        node_n[lid] = n_left
        node_depth[lid] = depth + 1
        node_start[rid] = start + n_left
        node_end[rid] = end
        node_n[rid] = nn - n_left
        node_depth[rid] = depth + 1
        stack[top] = rid
        top += 1
        stack[top] = lid
        top += 1

    return (
        feature[:node_count].copy(),
        thr[:node_count].copy(),
        is_cat_split[:node_count].copy(),
        left_mask[:node_count].copy(),
        right_mask[:node_count].copy(),
        left_child[:node_count].copy(),
        right_child[:node_count].copy(),
        node_n[:node_count].copy(),
        node_start[:node_count].copy(),
        node_end[:node_count].copy(),
        node_depth[:node_count].copy(),
        pred[:node_count].copy(),
        gain_arr[:node_count].copy(),
        sorted_idx[0].copy(),
    )


@njit(cache=True)
def route_rows(
    Xq,
    feature,
    thr,
    is_cat_split,
    left_mask,
    right_mask,
    left_child,
    right_child,
    node_n,
):
    out = np.empty(Xq.shape[0], dtype=np.int64)
    for i in range(Xq.shape[0]):
        node = 0
        while feature[node] != LEAF:
            f = feature[node]
            if is_cat_split[node] == 1:
                code = np.uint64(int(Xq[i, f]))
                if (left_mask[node] >> code) & np.uint64(1) == np.uint64(1):
                    node = left_child[node]
                elif (right_mask[node] >> code) & np.uint64(1) == np.uint64(1):
                    node = right_child[node]
                elif node_n[left_child[node]] >= node_n[right_child[node]]:
                    # unseen category: follow the child with more training rows
                    node = left_child[node]
                else:
                    node = right_child[node]
            else:
                if Xq[i, f] <= thr[node]:
                    node = left_child[node]
                else:
                    node = right_child[node]
        out[i] = node
    return out
