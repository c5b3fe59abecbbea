import numpy as np
import pytest

from repower.mtp import ProblemSpec
from repower.replication import (estimate_alt_set, run_replication,
                                 unweighted_pos_closed_form)


def test_estimate_alt_set_rejected_rule():
    spec = ProblemSpec(m=4, alpha=0.05)
    # threshold inv_ccdf(0.0125) = 2.2414
    alt = estimate_alt_set([3.93, 3.72, 2.22, 0.37], spec)
    assert list(alt.indices) == [0, 1]
    assert alt.means == pytest.approx([3.93, 3.72])


def test_estimate_alt_set_positive_rule():
    spec = ProblemSpec(m=3, alpha=0.05)
    alt = estimate_alt_set([0.5, -0.5, 2.0], spec, rule="positive_estimate")
    assert list(alt.indices) == [0, 2]


def test_estimate_alt_set_bad_rule():
    spec = ProblemSpec(m=2, alpha=0.05)
    with pytest.raises(ValueError):
        estimate_alt_set([1.0, 1.0], spec, rule="bogus")
    with pytest.raises(ValueError):
        estimate_alt_set([1.0], spec)


def test_run_replication_pipeline():
    spec = ProblemSpec(m=4, alpha=0.05)
    z1 = np.array([3.93, 3.72, 2.22, 0.37])
    z2 = np.array([4.0, 3.4, 2.0, 0.1])
    res = run_replication(z1, z2, spec)
    assert list(res.alt_set.indices) == [0, 1]
    assert res.weights[2:] == pytest.approx([0.0, 0.0])
    assert np.array_equal(res.overall_rejections,
                          res.trial1_rejections & res.trial2_rejections)
    # hypotheses outside the alternative set cannot be rejected in trial 2
    assert not res.trial2_rejections[2] and not res.trial2_rejections[3]
    assert res.trial2_adjusted_p[3] == 1.0


def test_run_replication_empty_alt_uses_uniform():
    spec = ProblemSpec(m=2, alpha=0.05)
    res = run_replication([0.0, 0.5], [3.0, 0.0], spec)
    assert res.weights == pytest.approx([0.5, 0.5])
    # trial 2 may reject, but overall success still needs trial 1
    assert not res.overall_rejections.any()


def test_run_replication_length_check():
    spec = ProblemSpec(m=2, alpha=0.05)
    with pytest.raises(ValueError):
        run_replication([1.0, 2.0], [1.0], spec)


def test_closed_form_oracle_single_nonnull():
    # theta = theta' = (0, 3), alpha=0.05, m=2; frozen 40-digit reference
    spec = ProblemSpec(m=2, alpha=0.05)
    mpos, dpos = unweighted_pos_closed_form([0.0, 3.0], [0.0, 3.0], spec)
    assert mpos[1] == pytest.approx(0.7239260097939143, rel=1e-13)
    assert dpos == pytest.approx(mpos[1], rel=1e-13)


def test_closed_form_oracle_two_nonnull():
    spec = ProblemSpec(m=2, alpha=0.05)
    mpos, dpos = unweighted_pos_closed_form([3.0, 3.0], [3.0, 3.0], spec)
    assert dpos == pytest.approx(0.9237831519316901, rel=1e-13)


def test_closed_form_no_nonnull():
    spec = ProblemSpec(m=2, alpha=0.05)
    mpos, dpos = unweighted_pos_closed_form([0.0, 0.0], [0.0, -1.0], spec)
    assert dpos is None
    assert np.all(mpos < 0.05)


def test_closed_form_length_check():
    spec = ProblemSpec(m=2, alpha=0.05)
    with pytest.raises(ValueError):
        unweighted_pos_closed_form([1.0], [1.0, 2.0], spec)
