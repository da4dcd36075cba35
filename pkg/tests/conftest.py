import math

import numpy as np
import pytest

from crmkit import BaseMeasure, LevyContext, ParameterPath, make_family
from crmkit.piecewise import Piece, PiecewiseFunction


@pytest.fixture
def gamma_const_ctx():
    """Constant eta=(2, 3) with base 1.5 * Lebesgue, weight = jump size."""
    return LevyContext.build(
        make_family("gamma"),
        ParameterPath.constant([2.0, 3.0]),
        BaseMeasure.lebesgue(1.5),
        k=2,
    )


@pytest.fixture
def gamma_unit_ctx():
    """Constant eta=(2, 3) with unit Lebesgue base, weight = jump size."""
    return LevyContext.build(
        make_family("gamma"),
        ParameterPath.constant([2.0, 3.0]),
        BaseMeasure.lebesgue(1.0),
        k=2,
    )


@pytest.fixture
def pareto_linear_ctx():
    """Shape alpha(z) = z (so eta = -(z+1)), unit base; fails closure checks."""
    path = ParameterPath(
        [PiecewiseFunction([Piece(0.0, math.inf, "affine", c0=-1.0, c1=-1.0)])]
    )
    return LevyContext.build(
        make_family("pareto", scale=1.0),
        path,
        BaseMeasure.lebesgue(1.0),
        k=1,
        require_conditions=False,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260813)
