"""Evolutionary stability of vaccination responses against static mutants.

A user weighing vaccination at a decision epoch, with the system settled at
(theta_hat, psi_hat), anticipates

  vaccination cost  c_v1 + min(c_v2_bar, c_v2 / psi_hat)
  infection cost    p_I(theta_hat) * (c_I1 + c_I2 * d_e * theta_hat)

where p_I(theta) = lam*theta / (lam*theta + nu) is the chance of catching
the disease before the next opportunity.  The utility of choosing
vaccination probability q is linear in q,

  u(q) = q * h + infection cost,
  h(theta_hat, psi_hat) = vaccination cost - infection cost,

so the static best response is always {1} (h < 0), {0} (h > 0) or the whole
interval (h = 0, reported Indifferent).  A dynamic policy is evolutionary
stable against static mutations when the acceptance probability it induces
at its own equilibrium is the unique static best response there, and stays
so under small static-mutant invasions.

Classification (endemic load rho > 1, no excess deaths):
  * h at the no-vaccination level (h_m) positive: never-vaccinating is
    stable; with rho < 1 the same verdict holds at the origin.
  * h_m < 0: the only candidate is saturated acceptance at the
    co-existence point, requiring mu*rho > mu + 1 and h(theta_E, psi_E) < 0;
    the family-specific parameter must push the raw propensity strictly
    above 1 there (beta* = 1 / per-unit-beta propensity).
  * otherwise no evolutionary stable response exists.

With d_e > 0 the same logic runs on the deadly analogues (no-vaccination
level 1 - 1/rho_e, saturated equilibrium from the deadly quadratic) and
every verdict is flagged conjectured.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

from .attractor import (
    Attractor,
    coexistence_point,
    deadly_coexistence_exact,
)
from .errors import ComplexRoot, EquilibriumNotFound, RegimeMismatch
from .ode import OdeState, find_equilibrium, varrho
from .params import ModelParams, derive_ratios
from .policy import Family, Policy, accept_prob, mutant, propensity


@dataclass(frozen=True)
class CostParams:
    """Perceived cost components of the user utility."""

    c_v1: float  # monetary vaccine cost
    c_v2: float  # hesitancy scale (divided by the vaccinated share)
    c_v2_bar: float  # hesitancy cap
    c_I1: float  # infection suffering cost
    c_I2: float = 0.0  # death-scare multiplier (enters via d_e * theta)

    def __post_init__(self) -> None:
        for name in ("c_v1", "c_v2", "c_v2_bar", "c_I1", "c_I2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def indifference_tol(self) -> float:
        return 1e-9 * (self.c_v1 + self.c_v2_bar + 1.0)


def p_infection(theta: float, params: ModelParams) -> float:
    """Probability of infection before the next decision epoch."""
    rate = params.lam * theta
    total = rate + params.nu
    if total == 0.0:
        warnings.warn("lam*theta + nu = 0; returning 0 by convention", RuntimeWarning)
        return 0.0
    return rate / total


def h_value(
    theta_hat: float, psi_hat: float, params: ModelParams, costs: CostParams
) -> float:
    """Signed gap between anticipated vaccination and infection costs."""
    if psi_hat > 0.0:
        hesitancy = min(costs.c_v2_bar, costs.c_v2 / psi_hat)
    else:
        hesitancy = costs.c_v2_bar
    infection = p_infection(theta_hat, params) * (
        costs.c_I1 + costs.c_I2 * params.d_e * theta_hat
    )
    return costs.c_v1 + hesitancy - infection


def utility(
    q: float,
    theta_hat: float,
    psi_hat: float,
    params: ModelParams,
    costs: CostParams,
) -> float:
    """Anticipated cost of vaccinating with probability q at equilibrium."""
    if psi_hat > 0.0:
        hesitancy = min(costs.c_v2_bar, costs.c_v2 / psi_hat)
    else:
        hesitancy = costs.c_v2_bar
    infection = p_infection(theta_hat, params) * (
        costs.c_I1 + costs.c_I2 * params.d_e * theta_hat
    )
    return q * (costs.c_v1 + hesitancy) + (1.0 - q) * infection


def nvdf_point(params: ModelParams) -> tuple[float, float]:
    """No-vaccination endemic level; uses rho_e so the deadly case is exact."""
    ratios = derive_ratios(params)
    if ratios.rho <= 1.0:
        raise RegimeMismatch("no endemic level: rho <= 1")
    return (1.0 - 1.0 / ratios.rho_e, 0.0)


def h_m(params: ModelParams, costs: CostParams) -> float:
    """h at the no-vaccination endemic level (the maximum over the family)."""
    theta_n, psi_n = nvdf_point(params)
    return h_value(theta_n, psi_n, params, costs)


class BestResponse(Enum):
    NEVER = "0"
    ALWAYS = "1"
    INDIFFERENT = "indifferent"

    @property
    def unique_q(self) -> Optional[float]:
        if self is BestResponse.NEVER:
            return 0.0
        if self is BestResponse.ALWAYS:
            return 1.0
        return None


def static_best_response(
    point: Union[Attractor, tuple[float, float]],
    params: ModelParams,
    costs: CostParams,
) -> BestResponse:
    """argmin over static q of the linear utility: {0}, {1} or the interval."""
    if isinstance(point, Attractor):
        theta_hat, psi_hat = point.theta_hat, point.psi_hat
    else:
        theta_hat, psi_hat = point
    h = h_value(theta_hat, psi_hat, params, costs)
    tol = costs.indifference_tol
    if h < -tol:
        return BestResponse.ALWAYS
    if h > tol:
        return BestResponse.NEVER
    return BestResponse.INDIFFERENT


class VerdictKind(Enum):
    NON_VACCINATING_ESS = "non-vaccinating-ess"
    VACCINATING_ESS = "vaccinating-ess"
    NO_ESS = "no-ess"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class EssVerdict:
    kind: VerdictKind
    equilibrium: tuple[float, float]
    h_value: float
    h_m: Optional[float] = None
    beta_star_threshold: Optional[float] = None
    conjectured: bool = False
    detail: str = ""


def _beta_star_threshold(
    family: Family, theta: float, psi: float
) -> float:
    """Smallest beta pushing the raw propensity above 1 at (theta, psi)."""
    probe = Policy(family, beta=1.0)
    slope = propensity(probe, theta, psi)
    if slope <= 0.0:
        return math.inf
    return 1.0 / slope


def classify_ess(
    family: Family,
    params: ModelParams,
    costs: CostParams,
    regime_tol: float = 1e-9,
) -> EssVerdict:
    """Evolutionary-stability verdict for one response family.

    Follows the case split on (rho, h_m, mu*rho vs mu+1, h at the saturated
    equilibrium); any of those quantities within tolerance of its boundary
    yields Marginal.  Deadly verdicts are conjectured.
    """
    if family not in (Family.FC, Family.FR, Family.VFC1):
        raise ValueError(f"ESS classification covers FC/FR/VFC1, got {family}")
    ratios = derive_ratios(params)
    rho, mu = ratios.rho, ratios.mu
    deadly = params.d_e > 0.0
    h_tol = costs.indifference_tol

    if abs(rho - 1.0) <= regime_tol:
        return EssVerdict(
            kind=VerdictKind.MARGINAL,
            equilibrium=(0.0, 0.0),
            h_value=math.nan,
            conjectured=deadly,
            detail="rho on the endemic boundary",
        )
    if rho < 1.0:
        h0 = h_value(0.0, 0.0, params, costs)
        return EssVerdict(
            kind=VerdictKind.NON_VACCINATING_ESS,
            equilibrium=(0.0, 0.0),
            h_value=h0,
            conjectured=deadly,
            detail="self-eradicating disease; origin is stable for every policy",
        )

    hm = h_m(params, costs)
    if abs(hm) <= h_tol:
        return EssVerdict(
            kind=VerdictKind.MARGINAL,
            equilibrium=nvdf_point(params),
            h_value=hm,
            h_m=hm,
            conjectured=deadly,
            detail="h at the no-vaccination level is on its sign boundary",
        )
    if hm > 0.0:
        point = nvdf_point(params)
        return EssVerdict(
            kind=VerdictKind.NON_VACCINATING_ESS,
            equilibrium=point,
            h_value=hm,
            h_m=hm,
            conjectured=deadly,
            detail="never vaccinating is the unique best response at the endemic level",
        )

    # h_m < 0: the saturated-acceptance equilibrium is the only candidate
    if deadly:
        try:
            eq = deadly_es_equilibrium(params, costs)
        except ComplexRoot:
            return EssVerdict(
                kind=VerdictKind.NO_ESS,
                equilibrium=nvdf_point(params),
                h_value=hm,
                h_m=hm,
                conjectured=True,
                detail="saturated deadly equilibrium has no real root",
            )
        theta_e, psi_e = eq.theta_exact, eq.psi_exact
        if abs(theta_e) <= regime_tol:
            return EssVerdict(
                kind=VerdictKind.MARGINAL,
                equilibrium=(theta_e, psi_e),
                h_value=math.nan,
                h_m=hm,
                conjectured=True,
                detail="deadly saturated equilibrium on the theta = 0 boundary",
            )
        if eq.no_ess or theta_e < 0.0:
            return EssVerdict(
                kind=VerdictKind.NO_ESS,
                equilibrium=nvdf_point(params),
                h_value=hm,
                h_m=hm,
                conjectured=True,
                detail="mu + o >= mu*rho_e: saturated infection share not positive",
            )
        h_e = eq.h_exact
    else:
        if math.isinf(mu) or mu * rho <= mu + 1.0 + regime_tol * (mu + 1.0):
            if not math.isinf(mu) and abs(mu * rho - (mu + 1.0)) <= regime_tol * (mu + 1.0):
                return EssVerdict(
                    kind=VerdictKind.MARGINAL,
                    equilibrium=nvdf_point(params),
                    h_value=hm,
                    h_m=hm,
                    detail="mu*rho on the mu+1 boundary",
                )
            return EssVerdict(
                kind=VerdictKind.NO_ESS,
                equilibrium=nvdf_point(params),
                h_value=hm,
                h_m=hm,
                detail="mu*rho <= mu+1: co-existence point does not exist",
            )
        theta_e, psi_e = coexistence_point(params)
        h_e = h_value(theta_e, psi_e, params, costs)

    if abs(h_e) <= h_tol:
        return EssVerdict(
            kind=VerdictKind.MARGINAL,
            equilibrium=(theta_e, psi_e),
            h_value=h_e,
            h_m=hm,
            conjectured=deadly,
            detail="h at the saturated equilibrium is on its sign boundary",
        )
    if h_e < 0.0:
        return EssVerdict(
            kind=VerdictKind.VACCINATING_ESS,
            equilibrium=(theta_e, psi_e),
            h_value=h_e,
            h_m=hm,
            beta_star_threshold=_beta_star_threshold(family, theta_e, psi_e),
            conjectured=deadly,
            detail="saturated acceptance is the unique best response",
        )
    return EssVerdict(
        kind=VerdictKind.NO_ESS,
        equilibrium=(theta_e, psi_e),
        h_value=h_e,
        h_m=hm,
        conjectured=deadly,
        detail="h >= 0 at the saturated equilibrium",
    )


@dataclass(frozen=True)
class DeadlyEsEquilibrium:
    """Saturated-acceptance equilibrium with excess deaths.

    ``(theta_exact, psi_exact)`` from the quadratic; ``(theta_approx,
    psi_approx)`` from the small-d_e expansion with its o-factor; ``no_ess``
    set when mu + o >= mu*rho_e (the infection share loses positivity).
    """

    theta_exact: float
    psi_exact: float
    theta_approx: float
    psi_approx: float
    o_factor: float
    no_ess: bool
    h_exact: float


def deadly_es_equilibrium(params: ModelParams, costs: CostParams) -> DeadlyEsEquilibrium:
    """Exact quadratic root and its small-d_e approximation (d_e > 0, q = 1)."""
    p = params
    if p.d_e <= 0.0:
        raise RegimeMismatch("requires d_e > 0")
    theta_exact, psi_exact = deadly_coexistence_exact(params)

    ratios = derive_ratios(params)
    mu, rho_e = ratios.mu, ratios.rho_e
    correction = p.d_e * (p.r + p.d_e - p.lam - p.nu) / (mu * p.lam * p.nu)
    o_factor = 1.0 / (1.0 + correction)
    theta_approx = 1.0 - 1.0 / rho_e - o_factor / (mu * rho_e)
    psi_approx = (o_factor / (mu * rho_e)) * (p.lam - p.d_e) / p.lam
    no_ess = mu + o_factor >= mu * rho_e

    return DeadlyEsEquilibrium(
        theta_exact=theta_exact,
        psi_exact=psi_exact,
        theta_approx=theta_approx,
        psi_approx=psi_approx,
        o_factor=o_factor,
        no_ess=no_ess,
        h_exact=h_value(theta_exact, psi_exact, params, costs),
    )


@dataclass(frozen=True)
class MutationProbe:
    p: float
    eps: float
    theta: float
    psi: float
    h: float
    best_response: BestResponse
    ok: bool


@dataclass(frozen=True)
class MutationReport:
    incumbent_q: float
    base_point: tuple[float, float]
    probes: tuple[MutationProbe, ...]

    @property
    def passed(self) -> bool:
        return all(probe.ok for probe in self.probes)

    @property
    def violations(self) -> list[MutationProbe]:
        return [probe for probe in self.probes if not probe.ok]


def mutation_stability(
    family: Family,
    beta_incumbent: float,
    params: ModelParams,
    costs: CostParams,
    p_grid: Sequence[float] = (0.0, 0.5, 1.0),
    eps_grid: Sequence[float] = (0.001, 0.01, 0.05),
    eps_bar: float = 0.05,
    base_point: Optional[tuple[float, float]] = None,
) -> MutationReport:
    """Check the incumbent's best response survives static-mutant invasions.

    For each static mutant probability p and invading fraction eps <= eps_bar,
    the perturbed mean-field equilibrium under the eps-mixture policy is
    root-found from the incumbent's equilibrium, h is evaluated there, and
    the static best response must still uniquely equal the incumbent's
    equilibrium acceptance probability.
    """
    base_policy = Policy(family, beta=beta_incumbent)
    if base_point is None:
        verdict = classify_ess(family, params, costs)
        if verdict.kind not in (
            VerdictKind.VACCINATING_ESS,
            VerdictKind.NON_VACCINATING_ESS,
        ):
            raise RegimeMismatch(f"no ESS verdict to probe: {verdict.kind}")
        base_point = verdict.equilibrium
    theta0, psi0 = base_point
    q_star = accept_prob(base_policy, theta0, psi0)
    if q_star not in (0.0, 1.0):
        raise RegimeMismatch(
            f"incumbent acceptance at equilibrium must be 0 or 1, got {q_star!r}"
        )
    target = BestResponse.NEVER if q_star == 0.0 else BestResponse.ALWAYS

    eta0 = (params.b - params.d - params.d_e * theta0) / varrho(theta0, psi0, params)
    probes: list[MutationProbe] = []
    for p in p_grid:
        for eps in eps_grid:
            if eps > eps_bar:
                continue
            perturbed = mutant(base_policy, p=p, eps=eps)
            result = find_equilibrium(
                OdeState(theta0, psi0, eta0), params, perturbed
            )
            if not result.converged:
                raise EquilibriumNotFound(
                    f"perturbed equilibrium not found for p={p}, eps={eps}: "
                    f"residual {result.residual:.3e}"
                )
            th_e, ps_e = result.state.theta, result.state.psi
            h_e = h_value(th_e, ps_e, params, costs)
            br = static_best_response((th_e, ps_e), params, costs)
            probes.append(
                MutationProbe(
                    p=p,
                    eps=eps,
                    theta=th_e,
                    psi=ps_e,
                    h=h_e,
                    best_response=br,
                    ok=br is target,
                )
            )
    return MutationReport(
        incumbent_q=q_star, base_point=(theta0, psi0), probes=tuple(probes)
    )
