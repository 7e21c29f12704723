"""Seeded random laws for property tests, sharpness runs and demos.

Random stream ``ivb-rng/1``: trial ``s`` of a run with seed ``seed`` draws from
``numpy.random.Generator(PCG64(SeedSequence([seed, s])))``.  Dirichlet vectors
are independent ``standard_gamma(alpha)`` draws divided by their sum (an
all-zero underflow puts unit mass on one uniformly chosen coordinate).  Both
PCG64 and SeedSequence are fixed, platform-independent algorithms, so a
(seed, stream) pair reproduces the same law everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .bounds import ace_interval, upper_terms
from .errors import InputError, SizeExceeded
from .observed import ObservedLaw, OutcomeJoint, normalize_outcome_joint
from .witness import DENSE_MAX_K, FullM1Law, phi, pi_ar_bracket, witness_ace

RNG_ALGORITHM = "ivb-rng/1"
MODES = ("full_m1", "observed_only", "boundary_biased")


@dataclass(frozen=True)
class GeneratorConfig:
    K: int
    seed: int = 0
    concentration: float = 1.0
    mode: str = "full_m1"

    def __post_init__(self):
        if self.K < 1:
            raise InputError(f"K must be >= 1, got {self.K}")
        if not self.concentration > 0:
            raise InputError(f"concentration must be > 0, got {self.concentration}")
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must fit in 64 unsigned bits")

    def with_(self, **kw) -> "GeneratorConfig":
        return replace(self, **kw)


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """The generator for trial ``stream`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))


def dirichlet(rng: np.random.Generator, alpha: float, size: int) -> np.ndarray:
    g = rng.standard_gamma(alpha, size)
    total = g.sum()
    if total <= 0:
        g = np.zeros(size)
        g[rng.integers(size)] = 1.0
        return g
    return g / total


def _exact_simplex(values) -> list[Fraction]:
    """Exact rationals proportional to ``values`` that sum to exactly one."""
    fr = [Fraction(float(v)) for v in values]
    total = sum(fr)
    return [v / total for v in fr]


def _atom_weights(cfg: GeneratorConfig, rng) -> np.ndarray:
    n = 4 * 2**cfg.K
    if cfg.mode == "boundary_biased" and rng.random() < 0.5:
        w = np.zeros(n)
        support = rng.choice(n, size=int(rng.integers(1, 4)), replace=False)
        w[support] = dirichlet(rng, cfg.concentration, len(support))
        return w
    return dirichlet(rng, cfg.concentration, n)


def sample_full_m1(cfg: GeneratorConfig, stream: int = 0, exact: bool = False) -> FullM1Law:
    """Random counterfactual law: Dirichlet atom weights times a Dirichlet P(Z)."""
    if cfg.K > DENSE_MAX_K:
        raise SizeExceeded(f"sample_full_m1 supports K <= {DENSE_MAX_K}, got {cfg.K}")
    from .oracle import response_atoms

    rng = rng_for(cfg.seed, stream)
    w = _atom_weights(cfg, rng)
    pz = dirichlet(rng, cfg.concentration, cfg.K)
    if exact:
        w, pz = _exact_simplex(w), _exact_simplex(pz)
    else:
        w, pz = [float(v) for v in w], [float(v) for v in pz]
    atoms = {}
    for a, v in zip(response_atoms(cfg.K), w):
        if v > 0:
            atoms[a.compliance, a.y0, a.y1] = v
    return FullM1Law(cfg.K, tuple(pz), atoms)


def sample_observed(cfg: GeneratorConfig, stream: int = 0, exact: bool = False
                    ) -> ObservedLaw:
    """K independent Dirichlet 2x2 slices; the result may violate the IV model.

    ``boundary_biased`` zeroes out a random subset of cells in about half the
    slices.
    """
    rng = rng_for(cfg.seed, stream)
    slices = []
    for _ in range(cfg.K):
        s = dirichlet(rng, cfg.concentration, 4)
        if cfg.mode == "boundary_biased" and rng.random() < 0.5:
            keep = rng.choice(4, size=int(rng.integers(1, 4)), replace=False)
            mask = np.zeros(4)
            mask[keep] = 1.0
            s = s * mask
            s = s / s.sum() if s.sum() > 0 else mask / mask.sum()
        slices.append(_exact_simplex(s) if exact else [float(v) for v in s])
    pz = dirichlet(rng, cfg.concentration, cfg.K)
    pz = _exact_simplex(pz) if exact else [float(v) for v in pz]
    p = [[[s[0], s[1]], [s[2], s[3]]] for s in slices]
    return ObservedLaw(p, pz)


def sample_law(cfg: GeneratorConfig, stream: int = 0, exact: bool = False) -> ObservedLaw:
    """Observed law per ``cfg.mode``: image of a counterfactual law or raw slices."""
    if cfg.mode == "observed_only":
        return sample_observed(cfg, stream, exact)
    return phi(sample_full_m1(cfg, stream, exact))[1]


def sample_feasible_law(cfg: GeneratorConfig, stream: int = 0, exact: bool = False,
                        max_tries: int = 64) -> ObservedLaw:
    """A law satisfying the instrumental inequalities.

    ``observed_only`` draws are rejected until feasible, moving to sub-streams
    ``stream * max_tries + attempt``; after ``max_tries`` failures the
    counterfactual-law image is used instead.
    """
    if cfg.mode != "observed_only":
        return sample_law(cfg, stream, exact)
    for attempt in range(max_tries):
        law = sample_observed(cfg, stream * max_tries + attempt, exact)
        if ace_interval(law).feasible:
            return law
    return sample_law(cfg.with_(mode="full_m1"), stream, exact)


def sample_outcome_joint(law: ObservedLaw, rng: np.random.Generator) -> OutcomeJoint:
    """Uniform draws of pi0, pi1 in their sharp intervals, then pi_ar in its bracket."""
    report = ace_interval(law)
    if not report.feasible:
        raise InputError("law violates the instrumental inequalities")

    def draw(iv):
        u = rng.random()
        if law.exact:
            return iv.lo + Fraction(u) * (iv.hi - iv.lo)
        return iv.lo + u * (iv.hi - iv.lo)

    pi0, pi1 = draw(report.pi0), draw(report.pi1)
    pi_ar = draw(pi_ar_bracket(law, pi0, pi1))
    return normalize_outcome_joint(pi0, pi1, pi_ar)


def true_ace(full: FullM1Law):
    """P(Y(x1)=1) - P(Y(x0)=1) of a counterfactual law."""
    return witness_ace(full)


def _mix(l0: ObservedLaw, l1: ObservedLaw, t) -> ObservedLaw:
    p = [[[(1 - t) * a + t * b for a, b in zip(r0, r1)] for r0, r1 in zip(s0, s1)]
         for s0, s1 in zip(l0.p, l1.p)]
    return ObservedLaw(p)


def boundary_parameter(inside: ObservedLaw, outside: ObservedLaw):
    """Largest ``t`` in [0, 1] with the mixture ``(1-t) inside + t outside`` feasible.

    Every crossing condition is ``lower term <= upper term`` with both sides
    affine along the segment, so the boundary is the smallest root among the
    conditions that fail at ``t = 1``.  Exact for rational inputs.
    """
    t_star = 1
    for i in (0, 1):
        lo0 = [1 - v for v, _ in upper_terms(inside, i, 0)]
        lo1 = [1 - v for v, _ in upper_terms(outside, i, 0)]
        hi0 = [v for v, _ in upper_terms(inside, i, 1)]
        hi1 = [v for v, _ in upper_terms(outside, i, 1)]
        for a0, a1 in zip(lo0, lo1):
            for b0, b1 in zip(hi0, hi1):
                h0, h1 = b0 - a0, b1 - a1
                if h1 < 0 <= h0:
                    t_star = min(t_star, h0 / (h0 - h1))
    return t_star


def sample_near_boundary(cfg: GeneratorConfig, stream: int = 0, offset=0,
                         exact: bool = True):
    """A law at distance ``offset`` (in mixing weight) from the feasibility boundary.

    A feasible counterfactual-law image is mixed with an infeasible draw;
    ``offset < 0`` lands inside the model, ``offset > 0`` outside, ``0`` exactly
    on the boundary.  Returns ``(law, t_boundary, t_used)``.
    """
    inside = sample_law(cfg.with_(mode="full_m1"), stream, exact=True)
    outside = None
    for attempt in range(256):
        cand = sample_observed(cfg.with_(mode="observed_only", concentration=0.3),
                               stream * 256 + attempt, exact=True)
        if not ace_interval(cand).feasible:
            outside = cand
            break
    if outside is None:
        raise InputError(f"no infeasible draw found for K={cfg.K}")
    t_star = boundary_parameter(inside, outside)
    t = min(max(t_star + Fraction(offset), Fraction(0)), Fraction(1))
    law = _mix(inside, outside, t)
    if not exact:
        law = law.to_float()
    return law, t_star, t
