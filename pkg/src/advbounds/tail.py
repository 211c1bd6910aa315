"""Certified bounds on infinite lattice tails.

tail_sum_bound majorizes sum_{|h| >= rho} |h|^(-nu) by a closed-form expression
(shell counting against a thickened sphere surface), and delta_K turns it into
the uniform bound on the far-region remainder of the cutoff lattice sum:
every discarded summand is controlled by the wedge-power inequality

    |p ^ q|^2 |p+q|^(2n)  <=  B_n |p|^2 |q|^2 (|p|^(2n) + |q|^(2n)),
    B_n = 2^(2n+1) (n+1)^(n+1) / (n+2)^(n+2),

whose sharp constant is attained at cos(theta) = n/(n+2), |p| = |q|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


def gamma_half(d: int) -> float:
    """Gamma(d/2) for positive integer d, by the exact closed form.

    Even d: (d/2 - 1)!.  Odd d = 2m+1: (2m)! sqrt(pi) / (4^m m!).
    """
    if d < 1:
        raise ValueError(f"requires d >= 1, got {d}")
    if d % 2 == 0:
        return float(math.factorial(d // 2 - 1))
    m = (d - 1) // 2
    return math.factorial(2 * m) * math.sqrt(math.pi) / (4**m * math.factorial(m))


@dataclass(frozen=True)
class TailBoundInputs:
    """Parameters of the tail estimate: dimension d, decay exponent nu, cutoff rho.

    Convergence needs nu > d; the closed form needs rho > 2*sqrt(d).
    """

    d: int
    nu: float
    rho: float

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"requires d >= 2, got d={self.d}")
        if not self.nu > self.d:
            raise ValueError(f"requires nu > d, got nu={self.nu}, d={self.d}")
        if not self.rho > 2.0 * math.sqrt(self.d):
            raise ValueError(
                f"requires rho > 2*sqrt(d) = {2.0 * math.sqrt(self.d):.6f}, got rho={self.rho}"
            )


def tail_sum_bound(inputs: TailBoundInputs) -> float:
    """Upper bound on sum over h in Z^d, |h| >= rho of |h|^(-nu):

        (2 pi^(d/2) / Gamma(d/2)) * sum_{i=0}^{d-1}
            C(d-1, i) d^((d-1-i)/2) / ((nu-1-i) (rho - 2 sqrt(d))^(nu-1-i))
    """
    d, nu, rho = inputs.d, float(inputs.nu), float(inputs.rho)
    base = rho - 2.0 * math.sqrt(d)
    terms = []
    for i in range(d):
        p = nu - 1.0 - i
        # p >= nu - d > 0 is guaranteed by the input invariants
        terms.append(math.comb(d - 1, i) * d ** ((d - 1 - i) / 2.0) / (p * base**p))
    return 2.0 * math.pi ** (d / 2.0) / gamma_half(d) * math.fsum(terms)


def wedge_power_ratio(n, c, u) -> float:
    """(1-c^2)(1+2*c*u+u^2)^n / (1+u^(2n)): the wedge-power inequality's ratio
    written in terms of c = cos(angle(p,q)) and u = |p|/|q|."""
    c = float(c)
    u = float(u)
    n = float(n)
    return (1.0 - c * c) * (1.0 + 2.0 * c * u + u * u) ** n / (1.0 + u ** (2.0 * n))


def wedge_power_bound(n) -> float:
    """B_n = 2^(2n+1)(n+1)^(n+1)/(n+2)^(n+2), the sup of wedge_power_ratio."""
    if float(n).is_integer() and n >= 0:
        m = int(n)
        return float(
            Fraction(2 ** (2 * m + 1) * (m + 1) ** (m + 1), (m + 2) ** (m + 2))
        )
    n = float(n)
    return 2.0 ** (2.0 * n + 1.0) * (n + 1.0) ** (n + 1.0) / (n + 2.0) ** (n + 2.0)


def delta_K(d: int, n, rho) -> float:
    """Uniform bound on the far-region part of the cutoff lattice sum:
    2 * B_n * tail_sum_bound(d, 2n, rho).  Requires n > d/2 and rho > 2*sqrt(d)."""
    if not float(n) > d / 2.0:
        raise ValueError(f"requires n > d/2, got n={n}, d={d}")
    inputs = TailBoundInputs(d=d, nu=2.0 * float(n), rho=float(rho))
    return 2.0 * wedge_power_bound(n) * tail_sum_bound(inputs)
