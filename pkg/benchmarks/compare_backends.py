"""Time the pure-numpy evaluation kernels against the numba ones.

Evaluates randomly wired genomes on random window batches shaped like the
classification workload (hundreds of recordings, ~1000 steps, width 3)
and reports per-call times after a warm-up pass so numba's compilation
cost is not counted.

    python3 benchmarks/compare_backends.py --recordings 200 --steps 998
"""

import argparse
import time

import numpy as np

from echoevo import kernels
from echoevo.backend import HAS_NUMBA
from echoevo.evolution import EvolutionConfig, minimal_echo_genome, \
    minimal_rnn_genome, mutate
from echoevo.rnn_baseline import compile_rnn


def grow(genome, rng, steps=30):
    cfg = EvolutionConfig(p_add_synapse=0.4, p_add_neuron=0.25,
                          p_remove_synapse=0.05, p_remove_neuron=0.02)
    for _ in range(steps):
        genome = mutate(genome, cfg, rng)
    return genome


def time_call(fn, args, repeats):
    fn(*args)  # warm-up (and numba compile)
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def echo_args(genome, windows):
    return (np.ascontiguousarray(genome.weights), windows,
            genome.input_idx.astype(np.int64),
            genome.input_signs.astype(np.float64),
            int(genome.output_idx[0]), 1.0)


def rnn_args(genome, windows):
    c = compile_rnn(genome)
    return (windows, c.is_bias, c.input_slot, c.fwd_ptr, c.fwd_src, c.fwd_w,
            c.rec_ptr, c.rec_src, c.rec_w, c.out_pos, 1.0)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--recordings", type=int, default=200)
    parser.add_argument("--steps", type=int, default=998)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    echo = grow(minimal_echo_genome(EvolutionConfig(), rng), rng)
    rnn = grow(minimal_rnn_genome(EvolutionConfig(), rng), rng)
    windows = rng.normal(size=(args.recordings, args.steps, 3))

    rows = []
    cases = [
        ("echo", kernels._echo_mean_bits_numpy,
         kernels._echo_mean_bits_numba if HAS_NUMBA else None,
         echo_args(echo, windows), echo.n),
        ("rnn", kernels._rnn_mean_bits_numpy,
         kernels._rnn_mean_bits_numba if HAS_NUMBA else None,
         rnn_args(rnn, windows), rnn.n),
    ]
    for name, numpy_fn, numba_fn, call_args, n in cases:
        t_numpy = time_call(numpy_fn, call_args, args.repeats)
        if numba_fn is None:
            rows.append((name, n, t_numpy, float("nan"), float("nan")))
            continue
        t_numba = time_call(numba_fn, call_args, args.repeats)
        if not np.allclose(numpy_fn(*call_args), numba_fn(*call_args),
                           atol=1e-12):
            raise SystemExit(f"{name}: backends disagree, benchmark aborted")
        rows.append((name, n, t_numpy, t_numba, t_numpy / t_numba))

    print(f"batch: {args.recordings} recordings x {args.steps} steps, "
          f"mean of {args.repeats} calls")
    print(f"{'kernel':<8}{'neurons':>8}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for name, n, t_np, t_nb, speed in rows:
        print(f"{name:<8}{n:>8}{t_np:>11.4f}s{t_nb:>11.4f}s{speed:>9.1f}x")
    if not HAS_NUMBA:
        print("numba is not installed; only the numpy path was timed")


if __name__ == "__main__":
    main()
