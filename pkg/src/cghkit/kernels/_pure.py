"""NumPy fallback for the incremental-update kernels."""

import numpy as np


def delta_error(replay_m, target_m, row_tw, col_tw, mu, mv, delta):
    w = row_tw[mu] * col_tw[mv]
    updated = replay_m + delta * w
    d0 = np.abs(replay_m) - target_m
    d1 = np.abs(updated) - target_m
    return float(np.sum(d1 * d1 - d0 * d0))


def commit_update(replay_m, row_tw, col_tw, mu, mv, delta):
    replay_m += delta * (row_tw[mu] * col_tw[mv])


def best_delta(replay_m, target_m, row_tw, col_tw, mu, mv, deltas):
    w = row_tw[mu] * col_tw[mv]
    d0 = np.abs(replay_m) - target_m
    best_index = -1
    best_change = 0.0
    for j, delta in enumerate(deltas):
        if delta == 0:
            continue
        d1 = np.abs(replay_m + delta * w) - target_m
        change = float(np.sum(d1 * d1 - d0 * d0))
        if change < best_change:
            best_change = change
            best_index = j
    return best_index, best_change
