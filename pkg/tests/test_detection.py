import math

import pytest

from framebits.detection import (BinProbabilities, ChannelConfig, apply_dark_counts,
                                 bare_bin_probs, poissonian_bin_probs)
from framebits.errors import DomainError
from framebits.source import SourceModel


def test_single_pair_half_efficiency_symmetry():
    model = SourceModel.generic([0.0, 1.0])
    pi = bare_bin_probs(model, ChannelConfig(eta_a=0.5, eta_b=0.5))
    for v in pi.as_tuple():
        assert v == pytest.approx(0.25, rel=1e-14)


def test_lossless_poissonian_clicks_coincide():
    pi = bare_bin_probs(SourceModel.poissonian(0.01), ChannelConfig(eta_a=1.0, eta_b=1.0))
    assert pi.p00 == pytest.approx(math.exp(-0.01), rel=1e-14)
    assert pi.p0c == 0.0
    assert pi.pc0 == 0.0
    assert pi.pcc == pytest.approx(-math.expm1(-0.01), rel=1e-13)


def test_bare_probs_match_truncated_series():
    lam, eta = 5.33e-5, 0.3
    cfg = ChannelConfig(eta_a=eta, eta_b=eta)
    closed = bare_bin_probs(SourceModel.poissonian(lam), cfg)
    series = bare_bin_probs(SourceModel.truncated_poissonian(lam, tail=1e-18), cfg)
    for a, b in zip(closed.as_tuple(), series.as_tuple()):
        assert a == pytest.approx(b, rel=1e-12)


def test_index_convention_alice_first():
    # Bob's arm blocked: only Alice can click
    model = SourceModel.generic([0.5, 0.5])
    pi = bare_bin_probs(model, ChannelConfig(eta_a=1.0, eta_b=0.0))
    assert pi.p0c == 0.0
    assert pi.pcc == 0.0
    assert pi.pc0 > 0.0


def test_dark_counts_pure_noise_frame():
    pi = BinProbabilities(p00=1.0, p0c=0.0, pc0=0.0, pcc=0.0)
    out = apply_dark_counts(pi, 0.1, 0.1)
    assert out.p00 == pytest.approx(0.81, rel=1e-14)
    assert out.p0c == pytest.approx(0.09, rel=1e-14)
    assert out.pc0 == pytest.approx(0.09, rel=1e-14)
    assert out.pcc == pytest.approx(0.01, rel=1e-14)


def test_dark_counts_zero_is_identity(rng):
    for _ in range(20):
        raw = rng.dirichlet((4, 1, 1, 1))
        pi = BinProbabilities(*raw)
        out = apply_dark_counts(pi, 0.0, 0.0)
        assert out.as_tuple() == pi.as_tuple()


def test_two_poissonian_paths_agree():
    lam, eta, q = 5.33e-5, 0.7, 6.53e-8
    via_mgf = apply_dark_counts(
        bare_bin_probs(SourceModel.poissonian(lam), ChannelConfig(eta_a=eta, eta_b=eta)),
        q, q)
    direct = poissonian_bin_probs(lam, eta, eta, q, q)
    for a, b in zip(via_mgf.as_tuple(), direct.as_tuple()):
        assert a == pytest.approx(b, rel=1e-14)


def test_generic_mgf_route_vs_closed_form(rng):
    # the truncated-series route through the generic code path
    for _ in range(10):
        lam = 10.0 ** rng.uniform(-5, -2)
        ea, eb = rng.uniform(0.1, 1.0, 2)
        qa, qb = 10.0 ** rng.uniform(-9, -4, 2)
        series = apply_dark_counts(
            bare_bin_probs(SourceModel.truncated_poissonian(lam, tail=1e-18),
                           ChannelConfig(eta_a=ea, eta_b=eb)), qa, qb)
        direct = poissonian_bin_probs(lam, ea, eb, qa, qb)
        for a, b in zip(series.as_tuple(), direct.as_tuple()):
            assert a == pytest.approx(b, rel=1e-12)


def test_poissonian_closed_form_values():
    out = poissonian_bin_probs(0.0, 0.5, 0.5, 0.0, 0.0)
    assert out.p00 == 1.0 and out.pcc == 0.0

    lam, eta, q = 1.0e-5, 0.9, 1.3e-10
    out = poissonian_bin_probs(lam, eta, eta, q, q)
    # leading order of the coincidence probability is lam * eta^2
    lead = lam * eta * eta
    assert out.pcc > 0.0
    assert abs(out.pcc - lead) < 3 * (lam * eta) ** 2 + 3 * q * lam * eta + 2 * q * q
    # marginals from the closed form
    assert out.pa0 == pytest.approx((1 - q) * math.exp(-lam * eta), rel=1e-14)
    assert out.pb0 == pytest.approx((1 - q) * math.exp(-lam * eta), rel=1e-14)
    # symmetric parameters give symmetric cross terms
    assert out.p0c == pytest.approx(out.pc0, rel=1e-14)


def test_normalization_many_random_draws(rng):
    for _ in range(10_000):
        lam = 10.0 ** rng.uniform(-6, 0)
        ea, eb = rng.uniform(0, 1, 2)
        qa, qb = rng.uniform(0, 0.2, 2)
        out = poissonian_bin_probs(lam, ea, eb, qa, qb)
        assert abs(sum(out.as_tuple()) - 1.0) < 1e-12
        assert out.pa0 == pytest.approx(out.p00 + out.p0c, abs=1e-15)
        assert out.pbc == pytest.approx(out.p0c + out.pcc, abs=1e-15)


def test_pcc_monotone_in_every_parameter():
    base = dict(lam=1e-4, ea=0.5, eb=0.6, qa=1e-5, qb=2e-5)

    def pcc(lam, ea, eb, qa, qb):
        return poissonian_bin_probs(lam, ea, eb, qa, qb).pcc

    for name, grid in (("lam", (1e-5, 1e-4, 1e-3, 1e-2)),
                       ("ea", (0.1, 0.4, 0.7, 1.0)),
                       ("eb", (0.1, 0.4, 0.7, 1.0)),
                       ("qa", (0.0, 1e-4, 1e-2, 0.1)),
                       ("qb", (0.0, 1e-4, 1e-2, 0.1))):
        vals = []
        for v in grid:
            kw = dict(base)
            kw[name] = v
            vals.append(pcc(kw["lam"], kw["ea"], kw["eb"], kw["qa"], kw["qb"]))
        assert all(x <= y + 1e-15 for x, y in zip(vals, vals[1:])), name


def test_invalid_configs_rejected():
    with pytest.raises(DomainError):
        ChannelConfig(eta_a=1.5, eta_b=0.5)
    with pytest.raises(DomainError):
        ChannelConfig(eta_a=0.5, eta_b=0.5, q_a=1.0)
    with pytest.raises(DomainError):
        BinProbabilities(p00=0.5, p0c=0.5, pc0=0.5, pcc=0.5)
    with pytest.raises(DomainError):
        apply_dark_counts(BinProbabilities(1.0, 0.0, 0.0, 0.0), -0.1, 0.0)
