"""Exact perturbed counts and closed-form inversion for hand-built inputs.

Full domain: n=6, gamma=19, X = [100, 50, 30, 10, 5, 5] (N=200).
Expected perturbed counts are Y = A X with A the gamma-diagonal matrix, so
Y_v = o*N + (d-o)*X_v. The closed-form estimate (Y_v - x*N) / ((gamma-1)*x)
must recover X exactly.

Subset marginal: gamma=19, full domain 2000, subset domain 4, relative
supports [0.4, 0.3, 0.2, 0.1]. The subset matrix has diagonal
(gamma-1)*x + (n_C/n_Cs)*x and off-diagonal (n_C/n_Cs)*x.

All arithmetic in Fractions; floats printed for freezing into tests.
"""

from fractions import Fraction

GAMMA = 19


def full_domain():
    n = 6
    N = 200
    X = [100, 50, 30, 10, 5, 5]
    x = Fraction(1, GAMMA + n - 1)
    d, o = GAMMA * x, x
    Y = [o * N + (d - o) * Xv for Xv in X]
    print(f"full domain: n={n} N={N} x={x}")
    for v, (Xv, Yv) in enumerate(zip(X, Y)):
        back = (Yv - x * N) / ((GAMMA - 1) * x)
        assert back == Xv
        print(f"  v={v}  X={Xv}  Y={Yv} = {float(Yv):.17g}  recovered={back}")
    print("  sum(Y) =", sum(Y), "(must equal N)")


def subset_marginal():
    n_C, n_Cs = 2000, 4
    x = Fraction(1, GAMMA + n_C - 1)
    sup = [Fraction(4, 10), Fraction(3, 10), Fraction(2, 10), Fraction(1, 10)]
    diag = (GAMMA - 1) * x + (n_C // n_Cs) * x
    off = (n_C // n_Cs) * x
    print(f"subset: n_C={n_C} n_Cs={n_Cs} x={x} diag={diag} off={off}")
    print("  column sum =", diag + (n_Cs - 1) * off, "(must be 1)")
    perturbed = [off * sum(sup) + (diag - off) * s for s in sup]
    for s, pv in zip(sup, perturbed):
        back = (pv - off) / ((GAMMA - 1) * x)
        assert back == s
        print(f"  sup={s}  perturbed={pv} = {float(pv):.17g}  recovered={back}")
    cond = 1 / ((GAMMA - 1) * x)
    print("  condition number 1/((gamma-1)x) =", cond, "=", float(cond))


if __name__ == "__main__":
    full_domain()
    subset_marginal()
