"""Privacy calculus for perturbation mechanisms.

A privacy target (rho1, rho2) demands that any record property with prior
probability below rho1 keeps posterior probability below rho2 after the
adversary sees one perturbed record. The largest admissible ratio between
any two entries in a row of the perturbation matrix follows from that
target; posteriors follow from the extremal entries actually used.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class PrivacyTarget:
    """Prior/posterior probability caps, 0 < rho1 < rho2 < 1."""

    rho1: float
    rho2: float

    def __post_init__(self) -> None:
        if not 0.0 < self.rho1 < self.rho2 < 1.0:
            raise ValueError(
                f"invalid privacy target: need 0 < rho1 < rho2 < 1, got ({self.rho1}, {self.rho2})"
            )


@dataclass(frozen=True)
class PosteriorAnalysis:
    """Worst-case posterior summary for a mechanism at a given prior.

    ``maxp``/``minp`` are the extremal matrix entries an adversary can play
    against each other; ``posterior`` is the resulting worst-case posterior;
    ``posterior_range`` is the [low, high] pair for mechanisms whose entries
    vary per client, None otherwise.
    """

    gamma: float
    maxp: float
    minp: float
    posterior: float
    posterior_range: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.minp <= 0 or self.maxp < self.minp:
            raise ValueError("need 0 < minp <= maxp")
        if self.maxp / self.minp > self.gamma * (1 + 1e-12):
            raise ValueError(
                f"entry ratio {self.maxp / self.minp:.6g} exceeds gamma {self.gamma:.6g}"
            )
        if self.posterior_range is not None:
            low, high = self.posterior_range
            if not low <= self.posterior <= high:
                raise ValueError("posterior must lie inside posterior_range")


def gamma_for(target: PrivacyTarget) -> float:
    """Largest entry ratio compatible with the target: rho2(1-rho1)/(rho1(1-rho2)).

    Evaluated in exact rational arithmetic with one final rounding, so e.g.
    the (0.05, 0.50) target yields 19.0 rather than 18.999999999999996.
    """
    r1, r2 = Fraction(target.rho1), Fraction(target.rho2)
    return float(r2 * (1 - r1) / (r1 * (1 - r2)))


def posterior_from_entries(rho1: float, maxp: float, minp: float) -> float:
    """Bayes posterior when the adversary plays the extremal entries:
    rho1*maxp / (rho1*maxp + (1-rho1)*minp).

    Exposed in this general form so mechanisms whose extremal entries are not
    in the gamma ratio exactly (MASK, cut-and-paste) can be analyzed with
    their actual values. Exact rational arithmetic, one final rounding.
    """
    if minp <= 0 or maxp < minp:
        raise ValueError("need 0 < minp <= maxp")
    r1, hi, lo = Fraction(rho1), Fraction(maxp), Fraction(minp)
    return float(r1 * hi / (r1 * hi + (1 - r1) * lo))


def worst_case_posterior(rho1: float, gamma: float) -> float:
    """Posterior when maxp/minp attains gamma: rho1*gamma / (rho1*gamma + 1 - rho1)."""
    if gamma < 1:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    return posterior_from_entries(rho1, gamma, 1.0)


def posterior_range(
    rho1: float, gamma: float, alpha_fraction: float, domain_size: int
) -> tuple[float, float]:
    """Posterior bounds for the randomized gamma-diagonal mechanism.

    With x = 1/(gamma + n - 1) and alpha = alpha_fraction * gamma * x, each
    client's diagonal entry is gamma*x + r and off-diagonal entry
    x - r/(n-1), r uniform on [-alpha, alpha]. The determinable posterior at
    a given r uses those entries; the extremes over r give the range.
    """
    n = domain_size
    if n < 2:
        raise ValueError(f"domain_size must be >= 2, got {n}")
    if gamma <= 1:
        raise ValueError(f"gamma must be > 1, got {gamma}")
    if alpha_fraction < 0:
        raise ValueError(f"alpha_fraction must be >= 0, got {alpha_fraction}")
    x = 1.0 / (gamma + n - 1)
    alpha = alpha_fraction * gamma * x
    if alpha > min(gamma * x, (n - 1) * x) + 1e-15:
        raise ValueError(
            f"alpha {alpha:.6g} would push matrix entries negative "
            f"(limit {min(gamma * x, (n - 1) * x):.6g})"
        )

    def at(r: float) -> float:
        # direct Bayes on the realized entries; unlike posterior_from_entries
        # this tolerates draws where the diagonal dips below the off-diagonal
        d = Fraction(gamma) * Fraction(x) + Fraction(r)
        o = Fraction(x) - Fraction(r) / (n - 1)
        if d <= 0:
            return 0.0
        if o <= 0:
            return 1.0
        r1 = Fraction(rho1)
        return float(r1 * d / (r1 * d + (1 - r1) * o))

    return (at(-alpha), at(alpha))


def analyze(
    target: PrivacyTarget,
    domain_size: int,
    alpha_fraction: float = 0.0,
) -> PosteriorAnalysis:
    """Full posterior summary for a gamma-diagonal mechanism meeting ``target``
    on a domain of ``domain_size`` values."""
    gamma = gamma_for(target)
    x = 1.0 / (gamma + domain_size - 1)
    posterior = worst_case_posterior(target.rho1, gamma)
    rng: tuple[float, float] | None = None
    if alpha_fraction > 0:
        rng = posterior_range(target.rho1, gamma, alpha_fraction, domain_size)
    return PosteriorAnalysis(
        gamma=gamma, maxp=gamma * x, minp=x, posterior=posterior, posterior_range=rng
    )
