import math

import numpy as np
import pytest
import scipy.special

from reliakit.digamma import EULER_GAMMA, digamma, digamma_table


def test_digamma_at_one_is_minus_euler_gamma():
    # truncation at the threshold is < 1e-15, but the nine recurrence steps
    # from x=1 and the log cancellation cost a couple of ulp on top of that
    assert abs(digamma(1.0) - (-EULER_GAMMA)) < 4e-15


def test_integer_identity_harmonic_numbers():
    # psi(n) = H_{n-1} - gamma
    for n in range(2, 60):
        harmonic = math.fsum(1.0 / j for j in range(1, n))
        assert abs(digamma(n) - (harmonic - EULER_GAMMA)) < 1e-13


def test_matches_scipy_across_domain():
    xs = np.concatenate(
        [
            np.linspace(0.01, 1.0, 40),
            np.linspace(1.0, 9.99, 40),
            np.linspace(10.0, 500.0, 40),
            np.array([1e4, 1e6]),
        ]
    )
    for x in xs:
        assert abs(digamma(float(x)) - scipy.special.digamma(x)) < 1e-13


def test_rejects_nonpositive_and_nonfinite():
    for bad in (0.0, -1.0, -0.5, math.nan, math.inf):
        with pytest.raises(ValueError):
            digamma(bad)


def test_table_matches_scalar_and_is_frozen():
    t = digamma_table(40)
    assert t.shape == (41,)
    assert np.isnan(t[0])
    for m in range(1, 41):
        assert t[m] == digamma(m)
    with pytest.raises(ValueError):
        t[3] = 0.0
    with pytest.raises(ValueError):
        digamma_table(0)


def test_table_cached_instance():
    assert digamma_table(25) is digamma_table(25)
