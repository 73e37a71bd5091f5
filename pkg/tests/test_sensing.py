import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fr3sim.errors import DomainError
from fr3sim.sensing import (
    Combining,
    SensingPlan,
    delay_crb,
    plan_range_std,
    range_std,
    rms_bandwidth,
    sweep_csv,
    sweep_scaling,
)

from oracles import fisher_delay_crb, psd_second_moment

# frozen from the quadrature oracle
TWO_BAND_COHERENT_BETA = 500832640.0438906
TWO_BAND_NONCOHERENT_BETA = 28867513.459481288
SINGLE_400_CRB = 1.89527193215248e-20
SINGLE_400_RANGE_M = 0.04127209061989198
TWO_BAND_RANGE_M = 0.009515535020770632

TWO_BAND = ((-5e8, 1e8), (5e8, 1e8))


def test_single_band_beta():
    assert rms_bandwidth(SensingPlan(((0.0, 4e8),))) == pytest.approx(4e8 / math.sqrt(12), rel=1e-12)


def test_two_band_beta():
    co = rms_bandwidth(SensingPlan(TWO_BAND))
    nc = rms_bandwidth(SensingPlan(TWO_BAND, combining="noncoherent"))
    assert co == pytest.approx(500.8e6, abs=0.1e6)
    assert co == pytest.approx(TWO_BAND_COHERENT_BETA, rel=1e-9)
    assert nc == pytest.approx(28.87e6, abs=0.01e6)
    assert nc == pytest.approx(TWO_BAND_NONCOHERENT_BETA, rel=1e-9)


def test_crb_examples():
    beta = 4e8 / math.sqrt(12)
    crb = delay_crb(beta, 17.0)
    assert crb == pytest.approx(1.895e-20, rel=1e-3)
    assert crb == pytest.approx(SINGLE_400_CRB, rel=1e-9)
    assert math.sqrt(crb) == pytest.approx(0.138e-9, abs=0.001e-9)
    assert delay_crb(2 * beta, 17.0) == pytest.approx(crb / 4, rel=1e-12)
    assert delay_crb(beta, 17.0 + 10 * math.log10(2)) == pytest.approx(crb / 2, rel=1e-12)
    with pytest.raises(DomainError):
        delay_crb(0.0, 10)


def test_range_examples():
    r = range_std(delay_crb(4e8 / math.sqrt(12), 17.0))
    assert r == pytest.approx(0.0413, abs=0.0005)
    assert r == pytest.approx(SINGLE_400_RANGE_M, rel=1e-9)
    assert r < 0.10
    assert range_std(0.0) == 0.0
    assert plan_range_std(SensingPlan(TWO_BAND, 17.0)) == pytest.approx(TWO_BAND_RANGE_M, rel=1e-9)
    assert plan_range_std(SensingPlan(TWO_BAND, 17.0)) == pytest.approx(0.0095, abs=0.0002)


def test_plan_validation():
    with pytest.raises(DomainError):
        SensingPlan(())
    with pytest.raises(DomainError):
        SensingPlan(((0.0, 0.0),))
    with pytest.raises(DomainError):
        SensingPlan(((0.0, 2e8), (5e7, 1e8)))
    # touching edges are fine
    SensingPlan(((0.0, 1e8), (1e8, 1e8)))
    with pytest.raises(ValueError):
        SensingPlan(((0.0, 1e8),), combining="partial")


@st.composite
def plans(draw, max_bands=5):
    n = draw(st.integers(1, max_bands))
    widths = draw(st.lists(st.floats(1e6, 5e8), min_size=n, max_size=n))
    gaps = draw(st.lists(st.floats(1e3, 2e9), min_size=n, max_size=n))
    start = draw(st.floats(-3e9, 3e9))
    subbands, edge = [], start
    for w, g in zip(widths, gaps):
        edge += g
        subbands.append((edge + w / 2, w))
        edge += w
    return tuple(subbands)


@settings(max_examples=30, deadline=None)
@given(plans(), st.floats(-10, 30), st.sampled_from(list(Combining)))
def test_closed_form_matches_quadrature(subbands, snr_db, mode):
    plan = SensingPlan(subbands, snr_db, mode)
    coherent = mode is Combining.coherent
    beta2 = rms_bandwidth(plan) ** 2
    assert beta2 == pytest.approx(psd_second_moment(subbands, coherent), rel=1e-6)
    assert delay_crb(math.sqrt(beta2), snr_db) == pytest.approx(
        fisher_delay_crb(subbands, snr_db, coherent), rel=1e-6)


@given(plans())
def test_coherent_dominates_noncoherent(subbands):
    co = rms_bandwidth(SensingPlan(subbands))
    nc = rms_bandwidth(SensingPlan(subbands, combining="noncoherent"))
    assert co >= nc * (1 - 1e-12)
    if len(subbands) > 1:
        assert co > nc


@given(plans(max_bands=3), st.floats(1e6, 4e8), st.floats(0, 3e9))
def test_symmetric_addition_never_hurts(subbands, w, gap):
    plan = SensingPlan(subbands)
    widths = [b for _, b in subbands]
    centroid = sum(c * b for c, b in subbands) / sum(widths)
    lo = min(c - b / 2 for c, b in subbands)
    hi = max(c + b / 2 for c, b in subbands)
    # the pair sits outside the occupied span, so its offset exceeds any
    # second moment the existing spectrum can have
    reach = max(centroid - lo, hi - centroid) + gap + w / 2 + 1e3
    extra = ((centroid - reach, w), (centroid + reach, w))
    bigger = SensingPlan(subbands + extra)
    assert rms_bandwidth(bigger) >= rms_bandwidth(plan) * (1 - 1e-12)


@given(st.floats(1e3, 1e10), st.floats(-30, 40))
def test_crb_normalisation(beta, snr_db):
    crb = delay_crb(beta, snr_db)
    assert crb * beta**2 * 10 ** (snr_db / 10) == pytest.approx(1 / (8 * math.pi**2), rel=1e-12)


def test_sweep_examples():
    rows = sweep_scaling(1e8, 8.0, [1, 2, 3, 4], [0, 10, 17])
    by = {(r.factor, r.snr_db): r for r in rows}
    assert by[(1.0, 17.0)].crb_s2 / by[(4.0, 17.0)].crb_s2 == pytest.approx(16, rel=1e-12)
    assert by[(4.0, 17.0)].range_std_m < 0.10
    for (k, s), r in by.items():
        for (k2, s2), r2 in by.items():
            if k2 >= k and s2 >= s:
                assert r2.crb_s2 <= r.crb_s2
    assert [(r.factor, r.snr_db) for r in rows][:3] == [(1.0, 0.0), (1.0, 10.0), (1.0, 17.0)]


def test_sweep_with_plan_and_csv():
    rows = sweep_scaling(None, 8.0, [1, 2], [17], plan=SensingPlan(TWO_BAND))
    assert rows[0].range_std_m == pytest.approx(TWO_BAND_RANGE_M, rel=1e-9)
    assert rows[1].crb_s2 == pytest.approx(rows[0].crb_s2 / 4)
    text = sweep_csv(rows)
    assert text.splitlines()[0] == "factor,snr_db,crb_s2,range_std_m"
    assert len(text.splitlines()) == 3


def test_sweep_validation():
    with pytest.raises(DomainError):
        sweep_scaling(1e8, 8.0, [], [17])
    with pytest.raises(DomainError):
        sweep_scaling(1e8, 8.0, [0], [17])
    with pytest.raises(DomainError):
        sweep_scaling(1e8, 0.0, [1], [17])
