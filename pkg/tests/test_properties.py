"""Property-based checks for the pure numeric helpers."""
import math

import numpy as np
from hypothesis import given, strategies as st

from factorlens.datasets import seeded_permutation
from factorlens.optimize import soft_threshold
from factorlens.presentation import round_sig

finite = st.floats(
    allow_nan=False, allow_infinity=False, min_value=-1e12, max_value=1e12
)


@given(finite, st.integers(min_value=1, max_value=6))
def test_round_sig_is_idempotent(v, sig):
    once = round_sig(v, sig)
    assert round_sig(once, sig) == once


@given(finite, st.integers(min_value=1, max_value=6))
def test_round_sig_preserves_sign_and_magnitude(v, sig):
    r = round_sig(v, sig)
    if v == 0:
        assert r == 0
        return
    assert (r > 0) == (v > 0) or r == 0
    # never off by more than one unit in the last significant place
    assert abs(r - v) <= 10.0 ** (math.floor(math.log10(abs(v))) - sig + 1) * 0.5000001


@given(finite)
def test_round_sig_negation_symmetry(v):
    assert round_sig(-v, 2) == -round_sig(v, 2)


@given(st.integers(min_value=1, max_value=300), st.integers(min_value=0, max_value=2**64 - 1))
def test_seeded_permutation_always_permutes(n, seed):
    p = seeded_permutation(n, seed)
    assert sorted(p) == list(range(n))


@given(
    st.lists(finite, min_size=1, max_size=20),
    st.floats(min_value=0, max_value=1e6, allow_nan=False),
)
def test_soft_threshold_shrinks_toward_zero(values, t):
    v = np.array(values)
    s = soft_threshold(v, t)
    assert (np.abs(s) <= np.abs(v)).all()
    assert (np.abs(s) <= np.maximum(np.abs(v) - t, 0.0) + 1e-9).all()
    assert ((s == 0) | (np.sign(s) == np.sign(v))).all()
