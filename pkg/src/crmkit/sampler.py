"""Atomic draws of the random measure and of likelihood processes over them.

A draw superposes independent components.  Component n contributes
m_n ~ Poisson(A_{0,n}(0, z_max]) atoms; locations are exact inverse-CDF
draws from the normalized base measure (closed form on constant and affine
pieces, point masses kept as discrete choices), and the weight at location z
is T_k(S) with S ~ p(. | eta_n(z)).  Atoms merge sorted by location with
stable ties by component then draw order, so equal seeds give equal bytes.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, special

from . import expfam
from .errors import AtomLinkError, CrmError, DivergenceError, TruncationError
from .expfam import ExpFamilySpec
from .levy import LevyContext

__all__ = [
    "CRMDraw",
    "LikelihoodDraw",
    "sample_crm",
    "sample_likelihood",
    "evaluate_path",
    "link_rule",
    "link_names",
]


@dataclass(frozen=True)
class CRMDraw:
    """Atoms (location, weight > 0) of one realization over (0, z_max]."""

    locations: np.ndarray
    weights: np.ndarray
    component_index: np.ndarray
    z_max: float
    truncation_level: int
    tail_mass: float | None

    def __post_init__(self):
        locs = np.asarray(self.locations, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        comp = np.asarray(self.component_index, dtype=int)
        if not (locs.shape == w.shape == comp.shape):
            raise CrmError("atom arrays must share one shape")
        if locs.size and (np.any(w <= 0) or np.any(~np.isfinite(w))):
            raise CrmError("atom weights must be strictly positive and finite")
        if locs.size and (np.any(locs <= 0) or np.any(locs > self.z_max + 1e-12)):
            raise CrmError(f"atom locations must lie in (0, {self.z_max}]")
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "component_index", comp)

    def __len__(self) -> int:
        return int(self.locations.size)

    def csv_text(self) -> str:
        out = io.StringIO()
        out.write("component,location,weight\n")
        for c, z, w in zip(self.component_index, self.locations, self.weights):
            out.write(f"{int(c)},{float(z)!r},{float(w)!r}\n")
        return out.getvalue()

    @property
    def draw_id(self) -> str:
        return hashlib.sha256(self.csv_text().encode()).hexdigest()

    def component_counts(self) -> dict[int, int]:
        idx, counts = np.unique(self.component_index, return_counts=True)
        return {int(i): int(c) for i, c in zip(idx, counts)}


@dataclass(frozen=True)
class LikelihoodDraw:
    """Per-atom observations generated over a base draw's locations."""

    locations: np.ndarray
    observations: np.ndarray
    component_index: np.ndarray
    base_reference: str

    def __len__(self) -> int:
        return int(self.locations.size)

    def csv_text(self) -> str:
        out = io.StringIO()
        out.write("component,location,observation\n")
        for c, z, y in zip(self.component_index, self.locations, self.observations):
            out.write(f"{int(c)},{float(z)!r},{float(y)!r}\n")
        return out.getvalue()


def _piece_location(piece, rem: float) -> float:
    """z with mass rem accumulated from the piece's lower edge."""
    lo, hi = piece.lo, piece.hi
    if piece.kind == "const":
        return lo + rem / piece.c0
    if piece.kind == "affine":
        # solve c0 (z - lo) + c1 (z^2 - lo^2) / 2 = rem, stable as c1 -> 0
        r = rem + piece.c0 * lo + 0.5 * piece.c1 * lo * lo
        disc = piece.c0 * piece.c0 + 2.0 * piece.c1 * r
        denom = piece.c0 + np.sqrt(max(disc, 0.0))
        if denom <= 0:
            raise CrmError(f"affine base piece is not positive on ({lo}, {hi}]")
        return 2.0 * r / denom
    target = rem

    def short(z):
        return piece.integral(lo, z) - target

    hi_b = hi if np.isfinite(hi) else lo + 1.0
    while short(hi_b) < 0:
        hi_b = lo + 2.0 * (hi_b - lo)
    return float(optimize.brentq(short, lo, hi_b, xtol=1e-14, rtol=1e-14))


def _clip_piece(piece, z_max: float):
    from .piecewise import Piece

    lo, hi = max(piece.lo, 0.0), min(piece.hi, z_max)
    if not lo < hi:
        return None
    return Piece(lo, hi, piece.kind, c0=piece.c0, c1=piece.c1, func=piece.func)


def _sample_locations(ctx: LevyContext, z_max: float, count: int, rng) -> np.ndarray:
    if count == 0:
        return np.empty(0)
    segments = []
    for piece in ctx.base.density.pieces:
        clipped = _clip_piece(piece, z_max)
        if clipped is None:
            continue
        mass = clipped.integral(clipped.lo, clipped.hi)
        if mass < 0:
            raise CrmError("base density piece has negative mass")
        if mass > 0:
            segments.append((mass, clipped))
    for loc, mass in ctx.base.jumps_in(0.0, z_max):
        if mass > 0:
            segments.append((mass, loc))
    if not segments:
        raise CrmError("cannot place atoms: base measure has zero mass in the region")
    cum = np.cumsum([m for m, _ in segments])
    v = rng.random(count) * cum[-1]
    idx = np.searchsorted(cum, v, side="right")
    locs = np.empty(count)
    for j in range(count):
        mass_before = cum[idx[j] - 1] if idx[j] > 0 else 0.0
        seg = segments[int(idx[j])][1]
        if isinstance(seg, float):
            locs[j] = seg
        else:
            loc = _piece_location(seg, float(v[j] - mass_before))
            # pieces cover (lo, hi]; a zero remainder would land exactly on lo
            locs[j] = min(max(loc, np.nextafter(seg.lo, np.inf)), seg.hi)
    return locs


def sample_crm(
    components: Sequence[LevyContext],
    z_max: float,
    rng: np.random.Generator,
    truncation: int | None = None,
    tail_mass: float | None = None,
) -> CRMDraw:
    """Superpose Poisson draws of the given components over (0, z_max].

    ``truncation`` keeps only the first N components; the dropped-mass proxy
    is the explicit ``tail_mass`` when supplied, else the summed base mass of
    the rest, else None when that mass diverges.
    """
    if z_max <= 0:
        raise CrmError(f"region end must be positive, got z_max={z_max}")
    n_total = len(components)
    level = n_total if truncation is None else int(truncation)
    if not 0 <= level <= n_total:
        raise CrmError(f"truncation level {level} outside 0..{n_total}")

    locs, weights, comp_idx = [], [], []
    for n, ctx in enumerate(components[:level], start=1):
        ctx.gate()
        try:
            mass = ctx.base.increment(0.0, z_max)
        except DivergenceError as exc:
            raise TruncationError(
                f"component {n} has non-finite base mass over (0, {z_max}] "
                f"(partial {exc.partial}); restrict the region or the base support"
            )
        count = int(rng.poisson(mass))
        if count == 0:
            continue
        z = _sample_locations(ctx, z_max, count, rng)
        etas = np.empty((count, ctx.family.dimension))
        for j, zj in enumerate(z):
            eta = ctx.path.eval(float(zj))
            ctx.family.check_natural(eta)
            etas[j] = eta
        s = expfam.sample_each(ctx.family, etas, rng)
        u = np.asarray(ctx.stat().value(s), dtype=float)
        if np.any(u <= 0) or np.any(~np.isfinite(u)):
            raise CrmError(
                f"component {n}: statistic {ctx.stat().name!r} produced a nonpositive "
                "weight; choose a statistic with positive image for sampling"
            )
        locs.append(z)
        weights.append(u)
        comp_idx.append(np.full(count, n, dtype=int))

    if tail_mass is None and level == n_total:
        tail_mass = 0.0
    elif tail_mass is None:
        try:
            tail_mass = float(sum(c.base.increment(0.0, z_max) for c in components[level:]))
        except DivergenceError:
            tail_mass = None  # dropped mass diverges: leave it unknown

    if locs:
        z = np.concatenate(locs)
        u = np.concatenate(weights)
        c = np.concatenate(comp_idx)
        order = np.lexsort((np.arange(len(z)), c, z))
        z, u, c = z[order], u[order], c[order]
    else:
        z = u = np.empty(0)
        c = np.empty(0, dtype=int)
    return CRMDraw(z, u, c, float(z_max), level, tail_mass)


_LINKS: dict[str, Callable[[float], tuple]] = {}


def _register_link(name):
    def wrap(fn):
        _LINKS[name] = fn
        return fn

    return wrap


@_register_link("bernoulli_prob")
def _bernoulli_prob(w: float) -> tuple:
    if not 0.0 < w < 1.0:
        raise ValueError(f"success probability must lie in (0, 1), got {w}")
    return (float(special.logit(w)),)


@_register_link("poisson_rate")
def _poisson_rate(w: float) -> tuple:
    if w <= 0:
        raise ValueError(f"rate must be positive, got {w}")
    return (float(np.log(w)),)


@_register_link("lognormal_precision")
def _lognormal_precision(w: float) -> tuple:
    if w <= 0:
        raise ValueError(f"precision must be positive, got {w}")
    return (float(w),)


@_register_link("lognormal_variance")
def _lognormal_variance(w: float) -> tuple:
    if w <= 0:
        raise ValueError(f"variance must be positive, got {w}")
    return (1.0 / float(w),)


@_register_link("pareto_shape")
def _pareto_shape(w: float) -> tuple:
    if w <= 0:
        raise ValueError(f"shape must be positive, got {w}")
    return (-float(w) - 1.0,)


def link_rule(link) -> Callable[[float], tuple]:
    if callable(link):
        return link
    if link not in _LINKS:
        raise CrmError(f"unknown link rule {link!r}; registered: {', '.join(link_names())}")
    return _LINKS[link]


def link_names() -> tuple[str, ...]:
    return tuple(sorted(_LINKS))


def sample_likelihood(
    base: CRMDraw,
    likelihood: ExpFamilySpec,
    link,
    rng: np.random.Generator,
) -> LikelihoodDraw:
    """One observation per atom, gamma_j ~ likelihood(link(weight_j)).

    Locations are copied verbatim; a link output outside the likelihood's
    natural space raises an atom-level error naming the location.
    """
    rule = link_rule(link)
    m = len(base)
    etas = np.empty((m, likelihood.dimension))
    for j in range(m):
        loc = float(base.locations[j])
        try:
            eta = np.asarray(rule(float(base.weights[j])), dtype=float)
            if eta.shape != (likelihood.dimension,):
                raise ValueError(
                    f"link returned {eta.shape}, wanted ({likelihood.dimension},)"
                )
            likelihood.check_natural(eta)
        except (ValueError, CrmError) as exc:
            raise AtomLinkError(
                f"atom at location {loc}: link output invalid for "
                f"{likelihood.name}: {exc}",
                location=loc,
            )
        etas[j] = eta
    obs = expfam.sample_each(likelihood, etas, rng) if m else np.empty(0)
    return LikelihoodDraw(
        base.locations.copy(), np.asarray(obs, dtype=float),
        base.component_index.copy(), base.draw_id,
    )


def evaluate_path(draw: CRMDraw, t):
    """T(t) = sum of weights at locations <= t; right-continuous step path."""
    ts = np.asarray(t, dtype=float)
    if np.any(ts < 0):
        raise CrmError("path evaluation needs t >= 0")
    cum = np.concatenate([[0.0], np.cumsum(draw.weights)])
    idx = np.searchsorted(draw.locations, ts, side="right")
    out = cum[idx]
    return float(out) if np.isscalar(t) or ts.ndim == 0 else out
