"""Composite Simpson quadrature against closed forms."""

import numpy as np
import pytest

from scorelab.core import DomainError
from scorelab.quadrature import composite_simpson

from oracles import truncated_gaussian_mean_oracle


def test_exact_for_cubics():
    """Simpson integrates polynomials up to degree 3 exactly."""
    got = composite_simpson(lambda x: x**3 - 2 * x**2 + x - 7, 0.0, 2.0, 2)
    want = 2.0**4 / 4 - 2 * 2.0**3 / 3 + 2.0**2 / 2 - 7 * 2.0
    assert got == pytest.approx(want, abs=1e-13)


def test_gaussian_truncated_mean_vs_closed_form():
    for mu, sigma in [(3.0, 1.0), (3.3, 0.8), (4.8, 0.3), (2.0, 2.5)]:
        got = composite_simpson(
            lambda s: s
            * np.exp(-0.5 * ((s - mu) / sigma) ** 2)
            / (sigma * np.sqrt(2 * np.pi)),
            0.5,
            5.5,
            8192,
        )
        want = truncated_gaussian_mean_oracle(0.5, 5.5, mu, sigma)
        assert got == pytest.approx(want, abs=1e-10)


def test_narrow_gaussian_needs_more_panels():
    mu, sigma = 3.05, 0.08
    want = truncated_gaussian_mean_oracle(0.5, 5.5, mu, sigma)
    fine = composite_simpson(
        lambda s: s * np.exp(-0.5 * ((s - mu) / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi)),
        0.5, 5.5, 65536,
    )
    assert fine == pytest.approx(want, abs=1e-10)


def test_panel_validation():
    with pytest.raises(DomainError):
        composite_simpson(lambda x: x, 0.0, 1.0, 3)
    with pytest.raises(DomainError):
        composite_simpson(lambda x: x, 0.0, 1.0, 0)
