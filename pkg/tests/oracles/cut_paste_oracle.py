"""Pure-Python simulation of the cut-and-paste randomization operator.

Operator, applied to the boolean expansion of a record (l_u = number of set
bits): draw j uniformly from {0..K}; keep w = min(j, l_u) of the input's set
bits, chosen uniformly without replacement; every other position becomes 1
independently with probability rho. Simulated 10^6 times with the stdlib
`random` module and aggregated by output weight l_v; also reports the
probability of reproducing the input pattern exactly.

Config matches the small test case: 3 binary attributes (M=3, M_b=6),
input record (0,1,0) -> bits [1,0,0,1,1,0] (l_u=3), K=3, rho=0.494.
"""

import random

M_B = 6
K = 3
RHO = 0.494
INPUT_ONES = (0, 3, 4)  # record (0,1,0) one-hot over three 2-wide blocks
TRIALS = 10 ** 6


def simulate(rnd):
    j = rnd.randint(0, K)
    w = min(j, len(INPUT_ONES))
    kept = rnd.sample(INPUT_ONES, w)
    out = 0
    for pos in kept:
        out |= 1 << pos
    for pos in range(M_B):
        if not (out >> pos) & 1 and rnd.random() < RHO:
            out |= 1 << pos
    return out


def main():
    rnd = random.Random(123456)
    by_weight = [0] * (M_B + 1)
    exact_input = 0
    input_bits = 0
    for pos in INPUT_ONES:
        input_bits |= 1 << pos
    for _ in range(TRIALS):
        out = simulate(rnd)
        by_weight[bin(out).count("1")] += 1
        if out == input_bits:
            exact_input += 1
    print(f"M_b={M_B} K={K} rho={RHO} input ones={INPUT_ONES} trials={TRIALS}")
    print("empirical P(l_v = z | l_u = 3), with 4-sigma binomial half-widths:")
    for z, c in enumerate(by_weight):
        p = c / TRIALS
        half = 4 * (p * (1 - p) / TRIALS) ** 0.5
        print(f"  z={z}: {p:.6f}  +-{half:.6f}")
    p = exact_input / TRIALS
    half = 4 * (p * (1 - p) / TRIALS) ** 0.5
    print(f"P(output == input pattern): {p:.6f}  +-{half:.6f}")


if __name__ == "__main__":
    main()
