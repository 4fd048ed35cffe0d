"""Mask-mechanism reference values.

1. The 2-bit itemset transition matrix at p=0.9 by direct enumeration:
   entry[v][u] = product over bit positions of (p if equal else 1-p).
2. The retention probability solving (p/(1-p))^(2M) = gamma, found by
   bisection (independent of the closed form used in the package).
3. Spot entries of the full flip matrix at M_b=4, p=0.7 from the Hamming
   distance formula p^(M_b-h) (1-p)^h.
"""

from fractions import Fraction


def itemset_matrix_2bit():
    p = Fraction(9, 10)
    print("2-bit itemset matrix at p=0.9 (rows=v, cols=u, order 00,01,10,11):")
    for v in range(4):
        row = []
        for u in range(4):
            e = Fraction(1)
            for bit in range(2):
                same = ((v >> bit) & 1) == ((u >> bit) & 1)
                e *= p if same else 1 - p
            row.append(e)
        print("  ", [f"{float(e):.4f}" for e in row])
    print("  11->11 =", float(p * p), " 11->10 =", float(p * (1 - p)),
          " 11->00 =", float((1 - p) * (1 - p)))


def retention_bisection(gamma, M):
    lo, hi = 0.5, 1.0 - 1e-15
    for _ in range(200):
        mid = (lo + hi) / 2
        if (mid / (1 - mid)) ** (2 * M) < gamma:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def flip_matrix_spot():
    p = 0.7
    print("M_b=4 p=0.7 entries by Hamming distance h:")
    for h in range(5):
        print(f"  h={h}: {p ** (4 - h) * (1 - p) ** h:.17g}")


if __name__ == "__main__":
    itemset_matrix_2bit()
    for M in (6, 7):
        print(f"retention p for gamma=19, M={M}: {retention_bisection(19, M):.16f}")
    flip_matrix_spot()
