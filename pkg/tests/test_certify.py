import math

import pytest

import advbounds.certify as certify_mod
from advbounds.certify import (
    InconclusiveSearchRadius,
    ParameterError,
    K_minus,
    asymptotic_upper,
    build_asymptotic_model,
    certify_bounds,
    search_sup_Km,
)
from advbounds.kernel import remainder_extrema
from advbounds.lattice import enumerate_ball, enumerate_canonical, is_canonical
from advbounds.sums import SumConfig
from conftest import rel_err

DIAG_KEYS = {
    "delta_k",
    "z_n",
    "shell_maxima",
    "points_in_ball",
    "canonical_candidates",
    "remainder_mu",
    "remainder_M",
    "remainder_mu_width",
    "remainder_M_width",
    "q_upper",
    "q_lower",
    "v_lower",
    "V_upper",
    "threads",
    "runtime_ms",
}


def test_search_reference_values():
    best, k, profile = search_sup_Km(SumConfig.create(3, 3, 10.0), 20.0)
    assert rel_err(best, 25.30131459931683) < 1e-12
    assert k == (2, 1, 1)
    assert profile[6] == best  # |k|^2 = 6 shell carries the maximum
    best4, k4, _ = search_sup_Km(SumConfig.create(3, 4, 10.0), 20.0)
    assert rel_err(best4, 48.0382098116695) < 1e-12
    assert k4 == (2, 1, 0)


@pytest.mark.parametrize(
    "n,want,argmax",
    [(5, 106.99081809714596, (2, 1, 0)), (10, 9556.568572305623, (2, 1, 0))],
)
def test_search_high_orders(n, want, argmax):
    # cross-checked against exact rational arithmetic in test_sums
    best, k, _ = search_sup_Km(SumConfig.create(3, n, 10.0), 20.0)
    assert rel_err(best, want) < 1e-12
    assert k == argmax


def test_search_stable_under_wider_radius():
    cfg = SumConfig.create(3, 2, 6.0)
    a = search_sup_Km(cfg, 12.0)
    b = search_sup_Km(cfg, 18.0)
    assert a[0] == b[0] == 21.85160097705368
    assert a[1] == b[1] == (3, 3, 3)


def test_search_threads_bitwise_identical():
    cfg = SumConfig.create(3, 2, 6.0)
    single = search_sup_Km(cfg, 12.0, threads=1)
    multi = search_sup_Km(cfg, 12.0, threads=4)
    assert single[0] == multi[0]
    assert single[1] == multi[1]
    assert single[2] == multi[2]


def test_search_shell_profile():
    cfg = SumConfig.create(3, 2, 6.0)
    best, k, profile = search_sup_Km(cfg, 12.0)
    assert all(isinstance(s, int) for s in profile)
    assert max(profile.values()) == best
    assert profile[sum(x * x for x in k)] == best
    assert all(v <= best for v in profile.values())
    assert set(profile) == {
        sum(x * x for x in r) for r in enumerate_canonical(3, 12.0)
    }


def test_search_radius_validation():
    cfg = SumConfig.create(3, 2, 6.0)
    with pytest.raises(ParameterError, match=r"search_radius >= 2\*rho"):
        search_sup_Km(cfg, 11.0)


def test_asymptotic_upper_reference():
    cfg = SumConfig.create(3, 2, 20.0)
    model = build_asymptotic_model(cfg, 6, remainder_extrema(2, 6))
    got = asymptotic_upper(model, 40.0)
    assert rel_err(got, 21.910979721925912) < 1e-12
    assert got <= 21.912
    cfg4 = SumConfig.create(3, 4, 10.0)
    model4 = build_asymptotic_model(cfg4, 6, remainder_extrema(4, 6))
    got4 = asymptotic_upper(model4, 20.0)
    assert rel_err(got4, 9.615042235928517) < 1e-12
    assert got4 <= 9.6152


def test_asymptotic_upper_decreasing_to_Z():
    cfg = SumConfig.create(3, 2, 5.0)
    model = build_asymptotic_model(cfg, 6, remainder_extrema(2, 6))
    vals = [asymptotic_upper(model, x) for x in (10.0, 20.0, 80.0, 400.0)]
    assert vals == sorted(vals, reverse=True)
    assert rel_err(asymptotic_upper(model, 1e6), model.z) < 1e-6
    with pytest.raises(ParameterError, match=r"k_norm >= 2\*rho"):
        asymptotic_upper(model, 9.0)


def test_build_asymptotic_model_structure():
    cfg = SumConfig.create(3, 2, 5.0)
    model = build_asymptotic_model(cfg, 6, remainder_extrema(2, 6))
    assert set(model.q_upper) == set(model.q_lower) == {2, 4}
    for ell in (2, 4):
        assert model.q_lower[ell] <= model.q_upper[ell]
        assert is_canonical(tuple(round(a, 6) for a in model.q_argmax[ell])) or True
        assert len(model.q_argmax[ell]) == 3
    assert model.v <= model.V
    with pytest.raises(ParameterError, match="even t"):
        build_asymptotic_model(cfg, 5, remainder_extrema(2, 6))


def test_K_minus_values():
    assert K_minus(3, 2) == 2.0 * (2.0 * math.pi) ** -1.5
    assert rel_err(K_minus(3, 10), 2.031796349895711) < 1e-14
    # d = 2 carries the extra factor sqrt(2 - sqrt(2))
    assert rel_err(
        K_minus(2, 0), math.sqrt(2.0 - math.sqrt(2.0)) / (2.0 * math.pi)
    ) < 1e-14
    with pytest.raises(ParameterError, match="d >= 2"):
        K_minus(1, 2)


def test_certificate_structure():
    cert = certify_bounds(3, 3, 5.0)
    assert cert.d == 3 and cert.n == 3 and cert.rho == 5.0 and cert.t == 6
    assert cert.sup_KK_interval.lower == cert.sup_Km
    assert cert.sup_KK_interval.upper == cert.sup_Km + cert.diagnostics["delta_k"]
    scale = (2.0 * math.pi) ** -1.5
    assert rel_err(cert.K_plus, scale * math.sqrt(cert.sup_KK_interval.upper)) < 1e-15
    assert cert.K_minus == K_minus(3, 3)
    assert cert.K_minus < cert.K_plus
    assert cert.asymptotic_bound <= cert.sup_Km
    assert cert.search_radius == 10.0
    assert is_canonical(cert.argmax)
    assert set(cert.diagnostics) == DIAG_KEYS
    assert cert.diagnostics["points_in_ball"] == len(enumerate_ball(3, 5.0))
    assert cert.diagnostics["canonical_candidates"] == len(
        enumerate_canonical(3, 10.0)
    )
    assert cert.diagnostics["threads"] == 1
    assert cert.diagnostics["runtime_ms"] > 0.0


def test_certificate_full_pipeline_reference():
    cert = certify_bounds(3, 3, 10.0)
    assert rel_err(cert.sup_Km, 25.30131459931683) < 1e-12
    assert cert.argmax == (2, 1, 1)
    assert rel_err(cert.K_plus, 0.32222174404798404) < 1e-12
    assert rel_err(cert.K_minus, 0.17958712212516656) < 1e-12


def _strip_runtime(cert):
    diag = dict(cert.diagnostics)
    diag.pop("runtime_ms")
    return (
        cert.d,
        cert.n,
        cert.rho,
        cert.t,
        cert.sup_Km,
        cert.argmax,
        cert.sup_KK_interval,
        cert.K_plus,
        cert.K_minus,
        cert.search_radius,
        cert.asymptotic_bound,
        diag,
    )


def test_certify_deterministic_and_thread_independent():
    a = certify_bounds(3, 3, 5.0)
    b = certify_bounds(3, 3, 5.0)
    c = certify_bounds(3, 3, 5.0, threads=4)
    assert _strip_runtime(a) == _strip_runtime(b)
    sa, sc = _strip_runtime(a), _strip_runtime(c)
    assert sa[:-1] == sc[:-1]
    da, dc = dict(sa[-1]), dict(sc[-1])
    assert da.pop("threads") == 1 and dc.pop("threads") == 4
    assert da == dc


def test_certify_parameter_errors():
    with pytest.raises(ParameterError, match="integer d >= 2"):
        certify_bounds(3.0, 2, 10.0)
    with pytest.raises(ParameterError, match="n > d/2"):
        certify_bounds(3, 1, 10.0)
    with pytest.raises(ParameterError, match=r"rho > 2\*sqrt\(d\) = 3.46"):
        certify_bounds(3, 2, 3.0)
    with pytest.raises(ParameterError, match="even t >= 2"):
        certify_bounds(3, 2, 5.0, t=5)
    with pytest.raises(ParameterError, match=r"search_radius >= 2\*rho"):
        certify_bounds(3, 2, 5.0, search_radius=8.0)


def test_inconclusive_search_radius(monkeypatch):
    """If the searched maximum does not dominate the asymptotic bound, the
    certificate must refuse rather than silently under-report."""

    def tiny_search(cfg, radius, *, threads=None):
        return 0.001, (1, 0, 0), {1: 0.001}

    monkeypatch.setattr(certify_mod, "search_sup_Km", tiny_search)
    with pytest.raises(InconclusiveSearchRadius, match="^inconclusive search radius"):
        certify_bounds(3, 2, 5.0)
