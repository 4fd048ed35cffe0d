"""Per-value variance of perturbed counts for a point-mass input.

n=4, gamma=19, all N=1000 records hold value 0. Every record lands on v
independently with probability d (v=0) or o (v!=0), so the count Y_v is
Binomial and Var(Y_v) = N q (1-q). Exact values via Fractions, then a
stdlib-random Monte Carlo estimate over 10^4 runs for comparison.
"""

import random
from fractions import Fraction

N = 1000
N_VALUES = 4
GAMMA = 19
RUNS = 10 ** 4


def exact():
    x = Fraction(1, GAMMA + N_VALUES - 1)
    d, o = GAMMA * x, x
    var0 = N * d * (1 - d)
    var_off = N * o * (1 - o)
    print(f"x={x} d={d} o={o}")
    print(f"exact Var(Y_0)   = {var0} = {float(var0):.17g}")
    print(f"exact Var(Y_v!=0)= {var_off} = {float(var_off):.17g}")
    return float(d), float(o)


def monte_carlo(d, o):
    rnd = random.Random(99)
    sums = [0.0] * N_VALUES
    sq = [0.0] * N_VALUES
    for _ in range(RUNS):
        counts = [0] * N_VALUES
        for _ in range(N):
            u = rnd.random()
            if u < d:
                counts[0] += 1
            else:
                v = 1 + min(int((u - d) / o), N_VALUES - 2)
                counts[v] += 1
        for v, c in enumerate(counts):
            sums[v] += c
            sq[v] += c * c
    for v in range(N_VALUES):
        mean = sums[v] / RUNS
        var = (sq[v] - RUNS * mean * mean) / (RUNS - 1)
        print(f"empirical Var(Y_{v}) over {RUNS} runs: {var:.3f}")


if __name__ == "__main__":
    d, o = exact()
    monte_carlo(d, o)
