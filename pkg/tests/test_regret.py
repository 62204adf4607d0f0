import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from erucb.environments import PRESETS
from erucb.errors import ParameterError
from erucb.regret import (
    GaussianArmSpec,
    RegretOracle,
    Trajectory,
    build_oracle,
    empirical_regret,
    exact_score,
    extreme_prob,
    gap_count_regret,
    ground_truth_index,
    theoretical_bound,
)

SEVEN_ARMS = PRESETS["paper7"]
# mpmath at 50 digits: 0.5 * erfc((rho - mu) / (sigma sqrt 2)), rho = 1.0
SEVEN_ARM_TAILS = [
    0.011135489479616388978,
    6.3887544005378024638e-58,
    0.000088417285200803699612,
    3.190891672910873002e-14,
    1.7764821120776938912e-33,
    9.865876450377002487e-10,
    1.9106595744987087912e-28,
]


def mp_tail(mu, sd, rho):
    with mpmath.workdps(40):
        return float(mpmath.erfc((mpmath.mpf(rho) - mu) / sd / mpmath.sqrt(2)) / 2)


def test_seven_arm_tails():
    for arm, expected in zip(SEVEN_ARMS, SEVEN_ARM_TAILS):
        assert extreme_prob(arm, 1.0) == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_tail_symmetry():
    assert extreme_prob(GaussianArmSpec(0.7, 0.3), 0.7) == 0.5


def test_tail_far():
    assert extreme_prob(GaussianArmSpec(0.89, 0.01), 1.0) <= 1e-27


@settings(max_examples=300)
@given(st.floats(-8, 8))
def test_tail_accuracy(z):
    assert abs(extreme_prob(GaussianArmSpec(0.0, 1.0), z) - mp_tail(0.0, 1.0, z)) <= 1e-12


@given(st.floats(-3, 3), st.floats(0.01, 2), st.floats(-3, 3), st.floats(0.01, 1))
def test_tail_monotone(mu, sd, rho, step):
    arm = GaussianArmSpec(mu, sd)
    hi = extreme_prob(arm, rho + step)
    lo = extreme_prob(arm, rho)
    # away from float saturation at either end
    if 1e-250 < lo < 0.999999:
        assert hi < lo
    if rho > mu and lo > 1e-300 and lo < 0.5:
        assert extreme_prob(GaussianArmSpec(mu, sd * 1.5), rho) > lo


def test_tail_rejects_sd():
    with pytest.raises(ParameterError):
        GaussianArmSpec(0.5, 0.0)


def test_ground_truth_seven_arms():
    assert ground_truth_index(SEVEN_ARMS, 0.01) == 0
    assert SEVEN_ARMS[0].mean + 10 * SEVEN_ARMS[0].std_dev == pytest.approx(1.54)


def test_ground_truth_small():
    assert ground_truth_index([GaussianArmSpec(0.3, 0.1)], 0.5) == 0
    assert ground_truth_index([GaussianArmSpec(0.5, 0.1), GaussianArmSpec(0.5, 0.2)], 0.25) == 1


def test_ground_truth_empty():
    with pytest.raises(ParameterError):
        ground_truth_index([], 0.1)


@given(
    st.lists(st.tuples(st.floats(-1, 1), st.floats(0.01, 1)), min_size=1, max_size=8),
    st.floats(-1, 1),
)
def test_ground_truth_translation_invariant(arms, c):
    specs = [GaussianArmSpec(m, s) for m, s in arms]
    shifted = [GaussianArmSpec(m + c, s) for m, s in arms]
    scores = [a.mean + 10 * a.std_dev for a in specs]
    best = max(scores)
    # skip near-ties where rounding in m + c can flip the argmax
    if sorted(scores)[-2:][0] < best - 1e-9 or len(scores) == 1:
        assert ground_truth_index(specs, 0.01) == ground_truth_index(shifted, 0.01)


def test_exact_score_examples():
    assert exact_score(GaussianArmSpec(0.85, 0.04), 0.01, 0.85) == pytest.approx(0.4)
    assert exact_score(GaussianArmSpec(0.84, 0.07), 0.01, 0.85) == pytest.approx(0.6971067811865475244)


def test_exact_score_degenerate():
    # no zero-variance spec exists, so drive sigma toward zero
    assert exact_score(GaussianArmSpec(0.5, 1e-300), 0.3, 0.5) == pytest.approx(0.0, abs=1e-299)


def test_oracle_seven_arms():
    o = build_oracle(SEVEN_ARMS, 1.0, 0.01, 0.85)
    assert o.truth_index == 0 == o.p_star_index
    assert o.p_star == max(o.extreme_probs)
    assert all(g >= 0 for g in o.theta_gaps)
    assert o.gamma_gaps[o.truth_index] == 0
    assert all(g > 0 for i, g in enumerate(o.gamma_gaps) if i != 0)


def test_oracle_warns_on_mismatch():
    arms = [GaussianArmSpec(0.0, 1.0), GaussianArmSpec(3.0, 0.1)]
    # beta = 3 favours the wide arm 0 while arm 1 owns almost all mass above rho = 2
    with pytest.warns(UserWarning, match="differs"):
        o = build_oracle(arms, 2.0, 0.01, 3.0)
    assert o.truth_index == 0 and o.p_star_index == 1


def _oracle(probs, gaps=None):
    p_star = max(probs)
    return RegretOracle(
        rho=1.0,
        extreme_probs=tuple(probs),
        p_star=p_star,
        p_star_index=probs.index(p_star),
        theta_gaps=tuple(p_star - p for p in probs),
        gamma_gaps=tuple(gaps if gaps is not None else [0.0] * len(probs)),
        truth_index=probs.index(p_star),
    )


def test_regret_best_arm_only():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        o = build_oracle(SEVEN_ARMS, 1.0, 0.01, 0.85)
    assert empirical_regret([0] * 50, o) == pytest.approx([0.0] * 50, abs=1e-12)


def test_regret_worse_arm():
    assert empirical_regret([1, 1, 1], _oracle([0.3, 0.1])) == pytest.approx([0.2, 0.4, 0.6])


def test_regret_uniform_seven_arms():
    o = build_oracle(SEVEN_ARMS, 1.0, 0.01, 0.85)
    sel = [t % 7 for t in range(700)]
    r = empirical_regret(sel, o)
    brute = 700 * SEVEN_ARM_TAILS[0] - 100 * math.fsum(SEVEN_ARM_TAILS)
    assert r[-1] == pytest.approx(6.6724518605877976213, rel=1e-12)
    assert r[-1] == pytest.approx(brute, rel=1e-12)


def test_regret_accepts_trajectory():
    tr = Trajectory(rho=0.5)
    for arm, x in [(0, 0.1), (1, 0.7), (1, 0.2)]:
        tr.append(arm, x)
    assert tr.extreme_counts == [0, 1, 1]
    assert empirical_regret(tr, _oracle([0.3, 0.1])) == pytest.approx([0.0, 0.2, 0.4])


def test_regret_index_out_of_range():
    with pytest.raises(ParameterError):
        empirical_regret([2], _oracle([0.3, 0.1]))


@settings(max_examples=200)
@given(
    st.lists(st.floats(0, 1), min_size=1, max_size=8).flatmap(
        lambda probs: st.tuples(
            st.just(probs), st.lists(st.integers(0, len(probs) - 1), min_size=1, max_size=300)
        )
    )
)
def test_regret_forms_agree(case):
    probs, sel = case
    o = _oracle(probs)
    a, b = empirical_regret(sel, o), gap_count_regret(sel, o)
    assert np.allclose(a, b, rtol=0, atol=1e-9)
    assert all(x >= -1e-12 for x in a)
    assert all(y >= x - 1e-12 for x, y in zip(a, a[1:]))
    assert a[-1] <= len(sel) * max(o.theta_gaps) + 1e-9


# --- theoretical bound ------------------------------------------------------


def test_bound_empty_sum():
    o = _oracle([0.2, 0.2], gaps=[0.0, 0.0])
    assert theoretical_bound(o, 100, 4, 0.01) == 0.0
    assert theoretical_bound(o, 100, 4, 0.01, "hoeffding") == 0.0


def test_bound_one_arm_examples():
    o = _oracle([0.02, 0.01], gaps=[0.0, 0.5])
    # oracle values: mpmath hand evaluation at ln n = 1
    assert theoretical_bound(o, math.e, 4, 0.01, "hoeffding") == pytest.approx(491825157.15, rel=1e-9)
    assert theoretical_bound(o, math.e, 4, 0.01, "generic") == pytest.approx(532789253.15, rel=1e-9)


def test_bound_rejects_alpha():
    with pytest.raises(ParameterError):
        theoretical_bound(_oracle([0.1]), 10, 2.0, 0.01)


def test_bound_grows_logarithmically():
    o = build_oracle(SEVEN_ARMS, 1.0, 0.01, 0.85)
    b2, b4 = theoretical_bound(o, 100, 4, 0.01), theoretical_bound(o, 10_000, 4, 0.01)
    const = sum(t * 3.0 for t, g in zip(o.theta_gaps, o.gamma_gaps) if g > 0)
    assert (b4 - const) == pytest.approx(2 * (b2 - const), rel=1e-9)
