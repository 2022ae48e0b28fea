import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ksatptf.classic import (
    ClassicModelId,
    applicable_mask,
    brakensiek84,
    campbell_shiozawa94,
    cosby84,
    dane_puckett94,
    estimate_arrays,
    estimate_classic,
    is_applicable,
    jabro92,
    puckett85,
    saxton86,
)
from ksatptf.errors import NotApplicable
from ksatptf.soil import SoilSample

from oracles import oracle_classic


def random_inputs(seed, n=1000):
    """Valid inputs on the simplex with strictly positive fines (so Jabro applies)."""
    rng = np.random.default_rng(seed)
    tex = rng.dirichlet([1.0, 1.0, 1.0], size=n) * 100
    tex = np.clip(tex, 1e-3, None)
    tex = tex / tex.sum(axis=1, keepdims=True) * 100
    bd = rng.uniform(0.8, 2.0, size=n)
    return tex[:, 0], tex[:, 1], tex[:, 2], bd


@pytest.mark.parametrize("model", list(ClassicModelId), ids=lambda m: m.value)
def test_matches_extended_precision_oracle(model):
    sa, si, cl, bd = random_inputs(1234 + list(ClassicModelId).index(model))
    got = estimate_arrays(model, sa, si, cl, bd)
    worst = 0.0
    for i in range(len(sa)):
        want = oracle_classic(model.value, sa[i], si[i], cl[i], bd[i])
        worst = max(worst, abs(float((got[i] - want) / want)))
    assert worst <= 1e-12


class TestSpotValues:
    def test_puckett_zero_clay(self):
        assert puckett85(0.0) == 376.7

    def test_dane_puckett_zero_clay(self):
        assert dane_puckett94(0.0) == 729.22

    def test_campbell_shiozawa_zero_fines(self):
        assert campbell_shiozawa94(0.0, 0.0) == 129.6

    def test_cosby(self):
        # 60.96 * 10**(-0.6 + 0.504 - 0.128) = 60.96 * 10**-0.224
        assert cosby84(40, 20) == pytest.approx(36.4, abs=0.1)
        assert cosby84(40, 20) == pytest.approx(36.39527, rel=1e-6)

    def test_brakensiek(self):
        assert brakensiek84(40, 20, 0.5) == pytest.approx(28.7, abs=0.1)

    def test_jabro(self):
        assert jabro92(50, 20, 1.5) == pytest.approx(15.34, abs=0.05)

    def test_jabro_as_printed_is_literal(self):
        bracket = 9.56 - 0.81 * np.log10(50) - 1.09 * np.log10(20) - 4.64 * 1.5
        assert jabro92(50, 20, 1.5, as_printed=True) == 24.0 * bracket
        assert jabro92(50, 20, 1.5, as_printed=True) == pytest.approx(-4.663, abs=1e-3)

    def test_saxton(self):
        assert saxton86(40) == pytest.approx(24 * np.exp(12.012 - 3.02), rel=1e-15)


class TestApplicability:
    @pytest.mark.parametrize("si,cl,ok", [(50, 20, True), (0, 20, False), (50, 0, False), (0, 0, False)])
    def test_jabro_needs_fines(self, si, cl, ok):
        s = SoilSample("s", 100 - si - cl, si, cl, 1.4)
        assert is_applicable(ClassicModelId.JABRO92, s) is ok
        assert bool(applicable_mask(ClassicModelId.JABRO92, si, cl)) is ok

    def test_jabro_raises_not_applicable(self):
        with pytest.raises(NotApplicable) as exc:
            estimate_classic(ClassicModelId.JABRO92, SoilSample("s", 80, 0, 20, 1.4))
        assert exc.value.field == "silt_pct"

    @pytest.mark.parametrize("model", [m for m in ClassicModelId if m is not ClassicModelId.JABRO92])
    def test_other_models_accept_zero_fines(self, model):
        s = SoilSample("s", 100, 0, 0, 1.4)
        assert is_applicable(model, s)
        assert estimate_classic(model, s) > 0


class TestProperties:
    # percentages on the 0.01 grid so neighbouring inputs differ measurably
    @given(st.integers(0, 10000), st.integers(0, 10000))
    def test_cosby_increases_with_sand(self, a, b):
        a, b = a / 100, b / 100
        if a < b:
            assert cosby84(a, 10) < cosby84(b, 10)

    @given(st.integers(0, 10000), st.integers(0, 10000))
    def test_clay_only_models_decrease_with_clay(self, a, b):
        a, b = a / 100, b / 100
        if a < b:
            assert puckett85(a) > puckett85(b)
            assert dane_puckett94(a) > dane_puckett94(b)

    @given(st.floats(0, 100))
    def test_saxton_decreases_with_sand(self, sa):
        assert saxton86(sa) > saxton86(min(sa + 1, 100)) or sa >= 99

    @given(st.floats(0.1, 99.0), st.floats(0.1, 99.0), st.floats(0.8, 2.0))
    def test_jabro_decreases_with_density(self, si, cl, bd):
        assert jabro92(si, cl, bd) > jabro92(si, cl, bd + 0.1)

    def test_positive_finite_on_valid_inputs(self):
        sa, si, cl, bd = random_inputs(99)
        for model in ClassicModelId:
            out = estimate_arrays(model, sa, si, cl, bd)
            assert np.all(np.isfinite(out)) and np.all(out > 0)

    def test_scalar_matches_batch(self):
        sa, si, cl, bd = random_inputs(5, n=50)
        for model in ClassicModelId:
            batch = estimate_arrays(model, sa, si, cl, bd)
            for i in range(50):
                s = SoilSample("s", sa[i], si[i], cl[i], bd[i])
                assert estimate_classic(model, s) == batch[i]


def test_citations_present():
    for model in ClassicModelId:
        assert model.citation
