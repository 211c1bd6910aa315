"""End-to-end certification of the advection-inequality constant.

The pipeline: a symmetry-reduced exact search for the cutoff sum's maximum on
|k| < search_radius, an asymptotic majorant dominating everything at and beyond
the search radius, the enclosure

    sup K_m  <=  sup KK  <=  sup K_m + delta_K,

and finally the certified constants

    K_plus  = (2 pi)^(-d/2) sqrt(sup K_m + delta_K),
    K_minus = 2^(n/2) (2 pi)^(-d/2) U_d,   U_2 = sqrt(2 - sqrt(2)), U_d = 1 else.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .kernel import remainder_extrema
from .lattice import enumerate_canonical
from .sums import Interval, K_m, SumConfig, Z_n, build_Q, extremize_Q, vV_nt
from .tail import delta_K


class ParameterError(ValueError):
    """An input fails one of the documented preconditions."""


class InconclusiveSearchRadius(RuntimeError):
    """The asymptotic region is not dominated by the finite search."""


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ParameterError(message)


@dataclass(eq=False)
class AsymptoticModel:
    """Coefficients of the two-sided large-|k| expansion of the cutoff sum.

    For |k| >= 2 rho:

        z + sum_l q_lower[l] |k|^(-l) + v |k|^(-t)
          <= K_m(k) <=
        z + sum_l q_upper[l] |k|^(-l) + V |k|^(-t),

    l ranging over the even integers 2, 4, ..., t-2.
    """

    z: float
    t: int
    rho: float
    q_lower: dict = field(default_factory=dict)
    q_upper: dict = field(default_factory=dict)
    q_argmax: dict = field(default_factory=dict)
    v: float = 0.0
    V: float = 0.0


def build_asymptotic_model(cfg: SumConfig, t: int, extrema) -> AsymptoticModel:
    """Extremize each direction coefficient and assemble the sandwich."""
    _require(t >= 2 and t % 2 == 0, f"requires even t >= 2, got t={t}")
    model = AsymptoticModel(z=Z_n(cfg), t=t, rho=float(cfg.rho))
    for ell in range(2, t, 2):
        q = build_Q(cfg, ell)
        lo, hi, arg = extremize_Q(q)
        model.q_lower[ell] = lo
        model.q_upper[ell] = hi
        model.q_argmax[ell] = arg
    model.v, model.V = vV_nt(cfg, t, extrema)
    return model


def asymptotic_upper(model: AsymptoticModel, k_norm: float) -> float:
    """Upper bound for K_m on the whole region |k| >= k_norm.

    Every coefficient of the upper branch is clamped at zero, which makes the
    majorant nonincreasing in |k|; its value at k_norm therefore dominates the
    supremum over [k_norm, infinity).
    """
    _require(
        k_norm >= 2.0 * model.rho,
        f"requires k_norm >= 2*rho = {2.0 * model.rho}, got k_norm={k_norm}",
    )
    total = model.z
    for ell in sorted(model.q_upper):
        total += max(model.q_upper[ell], 0.0) * k_norm ** (-ell)
    total += max(model.V, 0.0) * k_norm ** (-model.t)
    return total


def search_sup_Km(cfg: SumConfig, search_radius, *, threads: int | None = None):
    """Exact maximum of K_m over 0 < |k| < search_radius.

    Only canonical representatives (coordinates sorted descending, nonnegative)
    are evaluated; K_m is invariant under the signed-permutation group, so this
    loses nothing.  Ties keep the lexicographically smallest canonical form.
    Returns (max, argmax, shell_profile) with shell_profile mapping |k|^2 to
    the shell's maximum.
    """
    _require(
        float(search_radius) >= 2.0 * float(cfg.rho),
        f"requires search_radius >= 2*rho = {2.0 * float(cfg.rho)}, "
        f"got search_radius={search_radius}",
    )
    reps = enumerate_canonical(cfg.d, search_radius)
    workers = 1 if threads is None else int(threads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda k: K_m(k, cfg), reps, chunksize=16))
    else:
        values = [K_m(k, cfg) for k in reps]
    best = -math.inf
    best_k = None
    shell_profile: dict = {}
    for k, val in zip(reps, values):
        s = sum(c * c for c in k)
        if s not in shell_profile or val > shell_profile[s]:
            shell_profile[s] = val
        if val > best:
            best, best_k = val, k
    if best_k is None:
        raise ParameterError("search region contains no lattice points")
    return best, best_k, shell_profile


def K_minus(d: int, n) -> float:
    """Closed-form lower bound for the sharp constant (round down to present)."""
    _require(d >= 2, f"requires d >= 2, got d={d}")
    u_d = math.sqrt(2.0 - math.sqrt(2.0)) if d == 2 else 1.0
    return 2.0 ** (float(n) / 2.0) * (2.0 * math.pi) ** (-d / 2.0) * u_d


@dataclass(eq=False)
class BoundCertificate:
    """Everything needed to audit one (d, n) bound computation."""

    d: int
    n: float
    rho: float
    t: int
    sup_Km: float
    argmax: tuple
    sup_KK_interval: Interval
    K_plus: float
    K_minus: float
    search_radius: float
    asymptotic_bound: float
    diagnostics: dict


def certify_bounds(
    d: int,
    n,
    rho,
    t: int = 6,
    search_radius=None,
    *,
    threads: int | None = None,
) -> BoundCertificate:
    """Run the full pipeline and return a certificate (or raise).

    Raises ParameterError when a precondition fails and InconclusiveSearchRadius
    when the asymptotic majorant at the search radius exceeds the searched
    maximum -- enlarge search_radius (or rho) and retry.
    """
    start = time.perf_counter()
    _require(isinstance(d, int) and d >= 2, f"requires integer d >= 2, got d={d}")
    nf = float(n)
    _require(nf > d / 2.0, f"requires n > d/2, got n={n}, d={d}")
    rf = float(rho)
    _require(
        rf > 2.0 * math.sqrt(d),
        f"requires rho > 2*sqrt(d) = {2.0 * math.sqrt(d):.6f}, got rho={rho}",
    )
    _require(t >= 2 and t % 2 == 0, f"requires even t >= 2, got t={t}")
    if search_radius is None:
        search_radius = 2.0 * rf
    _require(
        float(search_radius) >= 2.0 * rf,
        f"requires search_radius >= 2*rho = {2.0 * rf}, "
        f"got search_radius={search_radius}",
    )

    cfg = SumConfig.create(d, nf, rho)
    extrema = remainder_extrema(nf, t)
    model = build_asymptotic_model(cfg, t, extrema)
    sup_km, argmax, shell_profile = search_sup_Km(
        cfg, search_radius, threads=threads
    )
    far_bound = asymptotic_upper(model, float(search_radius))
    if far_bound > sup_km:
        raise InconclusiveSearchRadius(
            f"inconclusive search radius: asymptotic bound {far_bound:.6g} at "
            f"|k| = {search_radius} exceeds searched maximum {sup_km:.6g}; "
            f"increase search_radius or rho"
        )

    dk = delta_K(d, nf, rho)
    upper = sup_km + dk
    k_plus = (2.0 * math.pi) ** (-d / 2.0) * math.sqrt(upper)
    k_minus = K_minus(d, nf)
    runtime_ms = (time.perf_counter() - start) * 1000.0

    diagnostics = {
        "delta_k": dk,
        "z_n": model.z,
        "shell_maxima": shell_profile,
        "points_in_ball": len(cfg.ball),
        "canonical_candidates": len(enumerate_canonical(d, search_radius)),
        "remainder_mu": extrema.mu,
        "remainder_M": extrema.M,
        "remainder_mu_width": extrema.mu_width,
        "remainder_M_width": extrema.M_width,
        "q_upper": dict(model.q_upper),
        "q_lower": dict(model.q_lower),
        "v_lower": model.v,
        "V_upper": model.V,
        "threads": 1 if threads is None else int(threads),
        "runtime_ms": runtime_ms,
    }
    return BoundCertificate(
        d=d,
        n=nf,
        rho=rf,
        t=t,
        sup_Km=sup_km,
        argmax=tuple(int(c) for c in argmax),
        sup_KK_interval=Interval(sup_km, upper),
        K_plus=k_plus,
        K_minus=k_minus,
        search_radius=float(search_radius),
        asymptotic_bound=far_bound,
        diagnostics=diagnostics,
    )
