"""Placement kernels shared by the simulator entry points.

Each kernel consumes pre-drawn randomness: one row of 0-based option
indices plus one tie-break uniform per ball. The uniform is consumed for
every ball whether or not a tie occurs, so the stream layout never
depends on load state.

Tie contract: the distinct option bins whose load equals the option-set
extreme are collected in order of first appearance in the row, and entry
``floor(u * k)`` of that list receives the ball. With a 53-bit uniform the
per-candidate bias is below 2**-52, far under anything resolvable by the
statistical checks in this package.

All kernels are plain Python functions; when numba is importable they are
additionally compiled (cached, nogil) and the compiled versions are
exported. Set ``UNFAIR_BINS_PURE_PYTHON=1`` to force the interpreted
versions.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
    from numba.extending import register_jitable
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

    def register_jitable(func):
        return func


HAVE_NUMBA = numba is not None and os.environ.get("UNFAIR_BINS_PURE_PYTHON") != "1"

UNFAIR = 0
LEAST_LOADED = 1
SINGLE_CHOICE = 2


@register_jitable
def _choose(loads, opts, u, policy, cand):
    """Pick the 0-based bin index that receives the ball for one option row."""
    d = opts.shape[0]
    if policy == SINGLE_CHOICE:
        return opts[0]
    best = loads[opts[0]]
    if policy == UNFAIR:
        for j in range(1, d):
            lj = loads[opts[j]]
            if lj > best:
                best = lj
    else:
        for j in range(1, d):
            lj = loads[opts[j]]
            if lj < best:
                best = lj
    k = 0
    for j in range(d):
        lab = opts[j]
        if loads[lab] == best:
            dup = False
            for q in range(j):
                if opts[q] == lab:
                    dup = True
                    break
            if not dup:
                cand[k] = lab
                k += 1
    if k == 1:
        return cand[0]
    idx = int(u * k)
    if idx >= k:  # guards float rounding at u ~ 1.0
        idx = k - 1
    return cand[idx]


def _place_block_py(loads, options, ties, policy):
    """Place one ball per option row, in order. Returns the last chosen index."""
    cand = np.empty(options.shape[1], np.int64)
    chosen = -1
    for i in range(options.shape[0]):
        chosen = _choose(loads, options[i], ties[i], policy, cand)
        loads[chosen] += 1
    return chosen


def _place_block_trace_py(loads, options, ties, policy, out):
    """Like ``_place_block_py`` but records the load vector after every ball."""
    n = loads.shape[0]
    cand = np.empty(options.shape[1], np.int64)
    for i in range(options.shape[0]):
        chosen = _choose(loads, options[i], ties[i], policy, cand)
        loads[chosen] += 1
        for b in range(n):
            out[i, b] = loads[b]


def _swap_block_py(loads, options, ties, leader, trailer):
    """Place balls until the leader's load drops below the trailer's.

    Returns the 0-based row index of the ball whose placement made
    ``loads[leader] < loads[trailer]`` (remaining rows are not placed),
    or -1 if the whole block was placed without a crossing.
    """
    cand = np.empty(options.shape[1], np.int64)
    for i in range(options.shape[0]):
        chosen = _choose(loads, options[i], ties[i], UNFAIR, cand)
        loads[chosen] += 1
        if loads[leader] < loads[trailer]:
            return i
    return -1


def _batch_profiles_py(out, options, ties, policy):
    """Run many independent placements; row t of ``out`` starts as the initial
    loads for trial t and ends as its final loads."""
    cand = np.empty(options.shape[2], np.int64)
    for t in range(options.shape[0]):
        loads = out[t]
        for i in range(options.shape[1]):
            chosen = _choose(loads, options[t, i], ties[t, i], policy, cand)
            loads[chosen] += 1


if HAVE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)
    place_block = _jit(_place_block_py)
    place_block_trace = _jit(_place_block_trace_py)
    swap_block = _jit(_swap_block_py)
    batch_profiles = _jit(_batch_profiles_py)
else:  # pragma: no cover - exercised via UNFAIR_BINS_PURE_PYTHON runs
    place_block = _place_block_py
    place_block_trace = _place_block_trace_py
    swap_block = _swap_block_py
    batch_profiles = _batch_profiles_py
