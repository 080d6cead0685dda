"""Batch evaluation kernels.

A kernel evaluates one genome against a batch of windowed recordings and
returns, per recording, the fraction of steps on which the classifier bit
was 1. The bit is 1 exactly when the output neuron's aggregation value is
>= 0 (the sigmoid output function crosses 0.5 there, and 0.5 rounds up).

Two implementations per kernel: numpy (vectorized over recordings) and
numba (parallel over recordings, scalar inner loops). The numba versions
are compiled lazily on first use and cached on disk.
"""

import numpy as np

from .backend import BACKEND, HAS_NUMBA

if HAS_NUMBA:
    import numba as nb


# ---------------------------------------------------------------------------
# echo networks: state is one activation vector, update is a matrix product

def _echo_mean_bits_numpy(weights, windows, input_idx, input_signs,
                          output_idx, init_value):
    n_rec, n_steps, _ = windows.shape
    n = weights.shape[0]
    act = np.full((n_rec, n), init_value)
    hits = np.zeros(n_rec)
    for t in range(n_steps):
        pre = act @ weights  # row vector convention: pre[j] = sum_i act[i] w[i, j]
        pre[:, input_idx] += input_signs * windows[:, t, :]
        hits += pre[:, output_idx] >= 0.0
        act = np.maximum(pre, 0.0)
    return hits / n_steps


if HAS_NUMBA:

    @nb.njit(cache=True, parallel=True)
    def _echo_mean_bits_numba(weights, windows, input_idx, input_signs,
                              output_idx, init_value):
        n_rec, n_steps, n_in = windows.shape
        n = weights.shape[0]
        out = np.empty(n_rec)
        for r in nb.prange(n_rec):
            act = np.full(n, init_value)
            pre = np.empty(n)
            hits = 0.0
            for t in range(n_steps):
                for j in range(n):
                    s = 0.0
                    for i in range(n):
                        s += act[i] * weights[i, j]
                    pre[j] = s
                for k in range(n_in):
                    pre[input_idx[k]] += input_signs[k] * windows[r, t, k]
                if pre[output_idx] >= 0.0:
                    hits += 1.0
                for j in range(n):
                    act[j] = pre[j] if pre[j] > 0.0 else 0.0
            out[r] = hits / n_steps
        return out


def echo_mean_bits(weights, windows, input_idx, input_signs, output_idx,
                   init_value):
    """Fraction of steps with output aggregation >= 0, per recording.

    weights      (n, n) connection matrix, rows = source
    windows      (n_rec, n_steps, n_in) input batch
    input_idx    (n_in,) neuron index per input slot
    input_signs  (n_in,) +1.0 identity, -1.0 sign reversal
    """
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    windows = np.ascontiguousarray(windows, dtype=np.float64)
    input_idx = np.ascontiguousarray(input_idx, dtype=np.int64)
    input_signs = np.ascontiguousarray(input_signs, dtype=np.float64)
    if BACKEND == "numba":
        return _echo_mean_bits_numba(weights, windows, input_idx, input_signs,
                                     int(output_idx), float(init_value))
    return _echo_mean_bits_numpy(weights, windows, input_idx, input_signs,
                                 int(output_idx), float(init_value))


# ---------------------------------------------------------------------------
# layered baseline networks, compiled to flat arrays (see rnn_baseline)
#
# Neuron positions are in evaluation order (by layer, then id). Synapses are
# stored CSR-style per destination: forward ones read the current step's
# values, recurrent ones the previous step's. The output neuron applies a
# sigmoid to its aggregation; everything else uses ReLU; bias neurons are
# clamped to 1.

def _rnn_mean_bits_numpy(windows, is_bias, input_slot, fwd_ptr, fwd_src,
                         fwd_w, rec_ptr, rec_src, rec_w, out_pos, init_value):
    n_rec, n_steps, _ = windows.shape
    m = is_bias.shape[0]
    prev = np.full((n_rec, m), init_value)
    prev[:, is_bias] = 1.0
    hits = np.zeros(n_rec)
    for t in range(n_steps):
        cur = np.empty((n_rec, m))
        for p in range(m):
            if is_bias[p]:
                cur[:, p] = 1.0
                continue
            agg = np.zeros(n_rec)
            for s in range(fwd_ptr[p], fwd_ptr[p + 1]):
                agg += fwd_w[s] * cur[:, fwd_src[s]]
            for s in range(rec_ptr[p], rec_ptr[p + 1]):
                agg += rec_w[s] * prev[:, rec_src[s]]
            slot = input_slot[p]
            if slot >= 0:
                agg += windows[:, t, slot]
            if p == out_pos:
                hits += agg >= 0.0
                cur[:, p] = _sigmoid_stable(agg)
            else:
                cur[:, p] = np.maximum(agg, 0.0)
        prev = cur
    return hits / n_steps


def _sigmoid_stable(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


if HAS_NUMBA:

    @nb.njit(cache=True, parallel=True)
    def _rnn_mean_bits_numba(windows, is_bias, input_slot, fwd_ptr, fwd_src,
                             fwd_w, rec_ptr, rec_src, rec_w, out_pos,
                             init_value):
        n_rec, n_steps, _ = windows.shape
        m = is_bias.shape[0]
        out = np.empty(n_rec)
        for r in nb.prange(n_rec):
            prev = np.full(m, init_value)
            cur = np.empty(m)
            for p in range(m):
                if is_bias[p]:
                    prev[p] = 1.0
            hits = 0.0
            for t in range(n_steps):
                for p in range(m):
                    if is_bias[p]:
                        cur[p] = 1.0
                        continue
                    agg = 0.0
                    for s in range(fwd_ptr[p], fwd_ptr[p + 1]):
                        agg += fwd_w[s] * cur[fwd_src[s]]
                    for s in range(rec_ptr[p], rec_ptr[p + 1]):
                        agg += rec_w[s] * prev[rec_src[s]]
                    slot = input_slot[p]
                    if slot >= 0:
                        agg += windows[r, t, slot]
                    if p == out_pos:
                        if agg >= 0.0:
                            hits += 1.0
                        if agg >= 0.0:
                            cur[p] = 1.0 / (1.0 + np.exp(-agg))
                        else:
                            ex = np.exp(agg)
                            cur[p] = ex / (1.0 + ex)
                    else:
                        cur[p] = agg if agg > 0.0 else 0.0
                for p in range(m):
                    prev[p] = cur[p]
            out[r] = hits / n_steps
        return out


def rnn_mean_bits(windows, is_bias, input_slot, fwd_ptr, fwd_src, fwd_w,
                  rec_ptr, rec_src, rec_w, out_pos, init_value):
    """Same contract as echo_mean_bits, for a compiled layered network."""
    windows = np.ascontiguousarray(windows, dtype=np.float64)
    is_bias = np.ascontiguousarray(is_bias, dtype=np.bool_)
    input_slot = np.ascontiguousarray(input_slot, dtype=np.int64)
    fwd_ptr = np.ascontiguousarray(fwd_ptr, dtype=np.int64)
    fwd_src = np.ascontiguousarray(fwd_src, dtype=np.int64)
    fwd_w = np.ascontiguousarray(fwd_w, dtype=np.float64)
    rec_ptr = np.ascontiguousarray(rec_ptr, dtype=np.int64)
    rec_src = np.ascontiguousarray(rec_src, dtype=np.int64)
    rec_w = np.ascontiguousarray(rec_w, dtype=np.float64)
    if BACKEND == "numba":
        return _rnn_mean_bits_numba(windows, is_bias, input_slot, fwd_ptr,
                                    fwd_src, fwd_w, rec_ptr, rec_src, rec_w,
                                    int(out_pos), float(init_value))
    return _rnn_mean_bits_numpy(windows, is_bias, input_slot, fwd_ptr,
                                fwd_src, fwd_w, rec_ptr, rec_src, rec_w,
                                int(out_pos), float(init_value))
