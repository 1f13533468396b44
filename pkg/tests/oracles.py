"""Independent brute-force oracles used to freeze expected values.

Nothing here goes through the library's FFT or incremental-update paths:
the transforms are direct evaluations of the defining sums, coverage is
counted per pixel, and toy search spaces are enumerated exhaustively.
"""

import itertools

import numpy as np


def dft2_loops(field):
    """Quadruple-loop unitary DFT, centered. Only bearable for tiny fields."""
    h = np.asarray(field, dtype=complex)
    height, width = h.shape
    out = np.zeros((height, width), dtype=complex)
    for u in range(height):
        for v in range(width):
            acc = 0.0 + 0.0j
            for m in range(height):
                for n in range(width):
                    acc += h[m, n] * np.exp(-2j * np.pi * (u * m / height + v * n / width))
            out[u, v] = acc
    out /= np.sqrt(height * width)
    return np.fft.fftshift(out)


def dft2_direct(field):
    """Direct summation via explicit exponential matrices (no FFT), centered."""
    h = np.asarray(field, dtype=complex)
    height, width = h.shape
    eh = np.exp(-2j * np.pi * np.outer(np.arange(height), np.arange(height)) / height)
    ew = np.exp(-2j * np.pi * np.outer(np.arange(width), np.arange(width)) / width)
    return np.fft.fftshift(eh @ h @ ew.T / np.sqrt(height * width))


def idft2_direct(spectrum):
    """Direct inverse of :func:`dft2_direct`."""
    r = np.fft.ifftshift(np.asarray(spectrum, dtype=complex))
    height, width = r.shape
    eh = np.exp(2j * np.pi * np.outer(np.arange(height), np.arange(height)) / height)
    ew = np.exp(2j * np.pi * np.outer(np.arange(width), np.arange(width)) / width)
    return eh @ r @ ew.T / np.sqrt(height * width)


def coverage_counts(width, height, regions):
    """Per-pixel cover count for a list of (x, y, w, h) regions."""
    counts = np.zeros((height, width), dtype=int)
    for x, y, w, h in regions:
        counts[y : y + h, x : x + w] += 1
    return counts


def masked_error(replay, target, mask, rescale=False):
    """Direct per-pixel evaluation of the masked amplitude error."""
    num = 0.0
    den = 0.0
    rr = 0.0
    rt = 0.0
    height, width = np.asarray(target).shape
    for y in range(height):
        for x in range(width):
            if not mask[y, x]:
                continue
            r = abs(replay[y, x])
            t = abs(target[y, x])
            den += t * t
            rr += r * r
            rt += r * t
    s = (rt / rr) if (rescale and rr > 0) else 1.0
    for y in range(height):
        for x in range(width):
            if mask[y, x]:
                d = s * abs(replay[y, x]) - abs(target[y, x])
                num += d * d
    return num / den


def enumerate_binary_holograms(height, width, states):
    """Every assignment of the given states to an height x width grid."""
    size = height * width
    for combo in itertools.product(range(len(states)), repeat=size):
        yield np.asarray(combo, dtype=int).reshape(height, width)


def descent_reachable_errors(start_indices, states, error_of):
    """Errors of all states reachable by strictly improving single-pixel moves.

    ``error_of(indices)`` scores an index grid; exploration is exhaustive
    breadth-first over single-pixel changes with strictly lower error.
    """
    start_key = tuple(start_indices.ravel())
    seen = {start_key: error_of(start_indices)}
    frontier = [start_indices]
    while frontier:
        grid = frontier.pop()
        base = seen[tuple(grid.ravel())]
        height, width = grid.shape
        for y in range(height):
            for x in range(width):
                for level in range(len(states)):
                    if level == grid[y, x]:
                        continue
                    nxt = grid.copy()
                    nxt[y, x] = level
                    err = error_of(nxt)
                    if err < base:
                        key = tuple(nxt.ravel())
                        if key not in seen:
                            seen[key] = err
                            frontier.append(nxt)
    return seen
