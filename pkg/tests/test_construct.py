import math

import numpy as np
import pytest

from crmkit import construct
from crmkit.errors import CrmError
from crmkit.expfam import ParameterPath, make_family
from crmkit.levy import BaseMeasure, LevyContext
from crmkit.piecewise import PiecewiseFunction


def test_plan_cells_cover_window(gamma_unit_ctx):
    plan = construct.DiscretizationPlan.build(gamma_unit_ctx, t=2.0, n=4)
    assert plan.n == 4
    assert len(plan.midpoints) == 8
    np.testing.assert_allclose(plan.masses, 0.25)
    np.testing.assert_allclose(plan.midpoints[:2], [0.125, 0.375])
    assert plan.etas.shape == (8, 2)


def test_plan_window_errors(gamma_unit_ctx):
    plan = construct.DiscretizationPlan.build(gamma_unit_ctx, t=1.0, n=4)
    with pytest.raises(CrmError, match="horizon"):
        plan.cell_range(0.0, 2.0)
    with pytest.raises(CrmError, match="grid"):
        plan.cell_range(0.1, 1.0)


def test_discrete_laplace_exact_product(gamma_unit_ctx):
    # per-cell factor 1 - (1/16)(1 - 9/16), sixteen cells
    plan = construct.DiscretizationPlan.build(gamma_unit_ctx, t=1.0, n=16)
    want = (1.0 - (1.0 / 16.0) * (1.0 - 9.0 / 16.0)) ** 16
    assert construct.discrete_laplace(gamma_unit_ctx, plan, 1.0, 1.0) == pytest.approx(
        want, rel=1e-12
    )


def test_discrete_laplace_poisson_branch():
    # a single atom of mass 2.5 forces the count-mode cell transform
    ctx = LevyContext.build(
        make_family("gamma"),
        ParameterPath.constant([2.0, 3.0]),
        BaseMeasure(PiecewiseFunction.constant(0.0), jumps=((0.5, 2.5),)),
        k=2,
    )
    plan = construct.DiscretizationPlan.build(ctx, t=1.0, n=2)
    want = math.exp(-2.5 * (1.0 - 9.0 / 16.0))
    assert construct.discrete_laplace(ctx, plan, 1.0, 1.0) == pytest.approx(want, rel=1e-12)


def test_discretization_gap_decreases(gamma_unit_ctx):
    gaps = []
    for n in (8, 32, 128):
        plan = construct.DiscretizationPlan.build(gamma_unit_ctx, t=1.0, n=n)
        gaps.append(construct.discretization_gap(gamma_unit_ctx, plan, 1.0, 1.0))
    assert gaps[0] > gaps[1] > gaps[2] > 0.0


def test_sample_discretized_total_statistic(gamma_unit_ctx, rng):
    plan = construct.DiscretizationPlan.build(gamma_unit_ctx, t=1.0, n=8)
    totals = [construct.sample_discretized(gamma_unit_ctx, plan, 1.0, rng) for _ in range(200)]
    assert all(x >= 0.0 for x in totals)
    assert any(x > 0.0 for x in totals)
    # window splitting: either sub-window total is a valid partial draw
    assert construct.sample_discretized(gamma_unit_ctx, plan, 0.5, rng, start=0.25) >= 0.0


def test_sample_discretized_deterministic(gamma_unit_ctx):
    plan = construct.DiscretizationPlan.build(gamma_unit_ctx, t=1.0, n=8)
    a = construct.sample_discretized(gamma_unit_ctx, plan, 1.0, np.random.default_rng(5))
    b = construct.sample_discretized(gamma_unit_ctx, plan, 1.0, np.random.default_rng(5))
    assert a == b


def test_empirical_laplace_tracks_discrete_value(gamma_unit_ctx):
    plan = construct.DiscretizationPlan.build(gamma_unit_ctx, t=1.0, n=16)
    est = construct.empirical_laplace(
        gamma_unit_ctx, plan, 1.0, 1.0, replicates=4000, rng=np.random.default_rng(11)
    )
    oracle = construct.discrete_laplace(gamma_unit_ctx, plan, 1.0, 1.0)
    assert est.replicates == 4000
    assert abs(est.mean - oracle) < 4 * est.se


def test_empirical_laplace_deterministic(gamma_unit_ctx):
    plan = construct.DiscretizationPlan.build(gamma_unit_ctx, t=1.0, n=8)
    a = construct.empirical_laplace(
        gamma_unit_ctx, plan, 1.0, 1.0, replicates=200, rng=np.random.default_rng(3)
    )
    b = construct.empirical_laplace(
        gamma_unit_ctx, plan, 1.0, 1.0, replicates=200, rng=np.random.default_rng(3)
    )
    assert a.mean == b.mean and a.se == b.se
