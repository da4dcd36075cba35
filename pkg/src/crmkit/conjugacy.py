"""Conjugate posterior updates of the natural-parameter path.

Each registered pair couples a prior family on the weight variable with a
likelihood family whose parameter is the weight itself (through a link
rule).  The update tau is a translation of the natural parameters by a
symmetric statistic of the observations, so posterior paths are the prior
paths shifted (uniform mode) or overridden at observed atoms (per-atom
mode), and the posterior process is the same construction rebuilt on the
updated path.

Registered pairs: beta-bernoulli, gamma-poisson, gamma-lognormal (known
drift mu), gamma-pareto (known scale x_m).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import expfam
from .errors import CrmError, NaturalSpaceError, SupportError
from .expfam import ExpFamilySpec, ParameterPath
from .levy import LevyContext, levy_density_u

__all__ = [
    "ConjugatePair",
    "make_pair",
    "pair_names",
    "posterior_path",
    "posterior_context",
    "posterior_levy_density",
    "posterior_process_params",
    "finite_dim_tv",
]


@dataclass(frozen=True)
class ConjugatePair:
    """Prior family, likelihood family, link rule, and the translation tau."""

    name: str
    prior_family: ExpFamilySpec
    likelihood_family: ExpFamilySpec
    link: str
    fixed: dict = field(default_factory=dict)

    def check_observation(self, y: float) -> None:
        if not self.likelihood_family.support.contains(float(y)):
            raise SupportError(
                f"{self.name}: observation {y} outside the {self.likelihood_family.name} support"
            )

    def shift(self, observations: Sequence[float]) -> np.ndarray:
        """tau(eta, Y) - eta; depends on Y only through symmetric statistics."""
        ys = np.asarray(list(observations), dtype=float)
        for y in ys:
            self.check_observation(y)
        n = len(ys)
        if self.name == "beta-bernoulli":
            return np.array([ys.sum(), n - ys.sum()])
        if self.name == "gamma-poisson":
            return np.array([ys.sum(), float(n)])
        if self.name == "gamma-lognormal":
            mu = self.fixed["mu"]
            return np.array([n / 2.0, float(np.sum((np.log(ys) - mu) ** 2) / 2.0)])
        if self.name == "gamma-pareto":
            x_m = self.fixed["x_m"]
            return np.array([float(n), float(np.sum(np.log(ys / x_m)))])
        raise CrmError(f"pair {self.name!r} has no registered update")

    def tau(self, eta, observations: Sequence[float]) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        out = eta + self.shift(observations)
        self.prior_family.check_natural(out)
        return out


def make_pair(name: str, **fixed) -> ConjugatePair:
    if name == "beta-bernoulli":
        if fixed:
            raise CrmError("beta-bernoulli takes no fixed hyperparameters")
        return ConjugatePair(
            name, expfam.make_family("beta"), expfam.make_family("bernoulli"),
            "bernoulli_prob",
        )
    if name == "gamma-poisson":
        if fixed:
            raise CrmError("gamma-poisson takes no fixed hyperparameters")
        return ConjugatePair(
            name, expfam.make_family("gamma"), expfam.make_family("poisson"),
            "poisson_rate",
        )
    if name == "gamma-lognormal":
        mu = float(fixed.pop("mu", 0.0))
        if fixed:
            raise CrmError(f"unknown gamma-lognormal hyperparameters {sorted(fixed)}")
        return ConjugatePair(
            name, expfam.make_family("gamma"), expfam.make_family("lognormal", mu=mu),
            "lognormal_precision", {"mu": mu},
        )
    if name == "gamma-pareto":
        x_m = float(fixed.pop("x_m", 1.0))
        if fixed:
            raise CrmError(f"unknown gamma-pareto hyperparameters {sorted(fixed)}")
        return ConjugatePair(
            name, expfam.make_family("gamma"), expfam.make_family("pareto", scale=x_m),
            "pareto_shape", {"x_m": x_m},
        )
    raise CrmError(f"unknown pair {name!r}; registered: {', '.join(pair_names())}")


def pair_names() -> tuple[str, ...]:
    return ("beta-bernoulli", "gamma-lognormal", "gamma-pareto", "gamma-poisson")


def _validation_grid(path: ParameterPath) -> np.ndarray:
    lo = max(c.lo for c in path.components)
    hi = min(c.hi for c in path.components)
    hi_eff = hi if np.isfinite(hi) else max(10.0, lo + 10.0)
    lo_eff = max(lo, 1e-4 * max(1.0, hi_eff))
    pts = set(np.linspace(lo_eff, hi_eff, 33))
    for b in path.breakpoints():
        if lo < b < hi:
            pts.add(b)
    return np.asarray(sorted(p for p in pts if lo < p <= hi), dtype=float)


def posterior_path(
    pair: ConjugatePair,
    prior_path: ParameterPath,
    observations,
    mode: str = "uniform",
) -> ParameterPath:
    """tau applied along the path.

    ``uniform`` treats ``observations`` as one flat collection and shifts the
    whole path; ``per-atom`` takes a mapping location -> observation list and
    overrides the path value only at those locations.
    """
    if prior_path.dimension != pair.prior_family.dimension:
        raise CrmError(
            f"path dimension {prior_path.dimension} != "
            f"{pair.prior_family.name} dimension {pair.prior_family.dimension}"
        )
    if mode == "uniform":
        new = prior_path.shifted(pair.shift(observations))
    elif mode == "per-atom":
        if not isinstance(observations, Mapping):
            observations = dict(observations)
        overrides = dict(prior_path.atom_overrides or {})
        for loc, ys in sorted(observations.items()):
            loc = float(loc)
            if not prior_path.defined_at(loc):
                raise CrmError(f"prior path is undefined at observed atom {loc}")
            overrides[loc] = pair.tau(prior_path.eval(loc), ys)
        new = ParameterPath(prior_path.components, overrides)
    else:
        raise CrmError(f"mode must be 'uniform' or 'per-atom', got {mode!r}")

    for z in _validation_grid(new):
        try:
            pair.prior_family.check_natural(new.eval(z))
        except NaturalSpaceError as exc:
            raise NaturalSpaceError(
                f"updated path exits the natural space at z={z}: {exc}"
            )
    return new


def posterior_context(
    pair: ConjugatePair,
    prior_ctx: LevyContext,
    observations,
    mode: str = "uniform",
) -> LevyContext:
    """The prior construction rebuilt on the tau-updated path."""
    if prior_ctx.family.name != pair.prior_family.name:
        raise CrmError(
            f"context family {prior_ctx.family.name!r} does not match "
            f"pair prior {pair.prior_family.name!r}"
        )
    new_path = posterior_path(pair, prior_ctx.path, observations, mode=mode)
    return LevyContext.build(
        prior_ctx.family,
        new_path,
        prior_ctx.base,
        prior_ctx.k,
        require_conditions=prior_ctx.require_conditions,
    )


def posterior_levy_density(
    pair: ConjugatePair,
    prior_ctx: LevyContext,
    observations,
    t: float,
    u: float,
    mode: str = "uniform",
) -> float:
    return levy_density_u(posterior_context(pair, prior_ctx, observations, mode=mode), t, u)


def posterior_process_params(
    pair: ConjugatePair, concentration: float, base_value: float, observations
) -> tuple[float, float]:
    """Update in (concentration, base-increment) coordinates.

    The round trip runs through the natural coordinates: beta-bernoulli maps
    (c, B0) to (c B0, c (1 - B0)) and back via (a + b, a / (a + b)); the
    gamma-prior pairs map (c, G0) to shape a = c, rate b = c G0 and back via
    (a, b / a).
    """
    c = float(concentration)
    g0 = float(base_value)
    if c <= 0:
        raise CrmError(f"concentration must be positive, got {c}")
    if pair.name == "beta-bernoulli":
        if not 0.0 < g0 < 1.0:
            raise CrmError(f"base increment must lie in (0, 1), got {g0}")
        eta = np.array([c * g0, c * (1.0 - g0)])
        a, b = pair.tau(eta, observations)
        return float(a + b), float(a / (a + b))
    if g0 <= 0:
        raise CrmError(f"base increment must be positive, got {g0}")
    eta = np.array([c, c * g0])
    a, b = pair.tau(eta, observations)
    return float(a), float(b / a)


def _likelihood_at(pair: ConjugatePair, x: float, ys: np.ndarray) -> float:
    from .sampler import link_rule

    eta = np.asarray(link_rule(pair.link)(float(x)), dtype=float)
    dens = expfam.density(pair.likelihood_family, eta, ys)
    return float(np.prod(np.asarray(dens, dtype=float)))


def finite_dim_tv(
    pair: ConjugatePair, eta, observations, grid_points: int = 2000
) -> float:
    """Total variation between grid-Bayes and the tau-updated prior density.

    The fixed-z conjugacy identity: renormalizing prior(x | eta) times the
    observation likelihood on a parameter grid must reproduce the prior
    family's density at tau(eta, Y).
    """
    eta = np.asarray(eta, dtype=float)
    ys = np.asarray(list(observations), dtype=float)
    eta_post = pair.tau(eta, ys)
    prior = pair.prior_family

    if np.isfinite(prior.support.hi):
        lo, hi = prior.support.lo, prior.support.hi
    else:
        hi = max(
            expfam.quantile_numeric(prior, eta, 1.0 - 1e-10),
            expfam.quantile_numeric(prior, eta_post, 1.0 - 1e-10),
        )
        lo = prior.support.lo
    h = (hi - lo) / grid_points
    xs = lo + (np.arange(grid_points) + 0.5) * h

    prior_vals = np.asarray(expfam.density(prior, eta, xs), dtype=float)
    lik_vals = np.array([_likelihood_at(pair, x, ys) for x in xs])
    post = prior_vals * lik_vals
    norm = post.sum() * h
    if norm <= 0:
        raise CrmError("grid posterior has zero mass; grid does not cover the support")
    post /= norm
    tau_vals = np.asarray(expfam.density(prior, eta_post, xs), dtype=float)
    return float(0.5 * np.sum(np.abs(post - tau_vals)) * h)
