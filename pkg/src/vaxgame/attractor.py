"""Closed-form equilibrium catalogue and numeric stability certification.

For each vaccination family the mean-field ODE settles, depending on the
load ratios (rho, mu) and the behaviour parameter beta, onto one of a small
set of points:

  * the no-vaccination endemic level  (1 - 1/rho, 0)          [NVDF]
  * a vaccinated disease-free state   (0, psi_hat)
  * a mixed interior state with both infection and vaccination
  * the co-existence point (theta_E, psi_E) reached whenever the acceptance
    probability saturates at 1
  * the origin (0, 0) when the disease is self-eradicating.

Every dispatch condition below is the exact inequality that makes the
returned point a zero of the field with inward-pointing transverse drift;
parameters within relative tolerance of a dispatch boundary raise
MarginalRegime rather than silently picking a side.

With excess deaths (d_e > 0) the corresponding formulas are conjectural:
they solve the field exactly but their attractor status is certified
numerically, never assumed.  Deadly outputs are therefore flagged
``conjectured`` and re-verified against the field residual before being
returned.  Note the deadly no-vaccination level is 1 - 1/rho_e, and the
deadly interior uses 1/rho = (r+b+d_e)/lam inside theta*; both follow from
setting the field to zero.

Stability certification combines a finite-difference Jacobian (one-sided at
simplex faces) with sampling of a quadratic Lyapunov form V(x) =
(x-x_hat)' P (x-x_hat), P solving J'P + PJ = -I.  The derivative of plain
squared Euclidean distance is *not* a valid surrogate here: stable
coexistence points routinely have strongly non-normal Jacobians whose
distance-to-attractor grows transiently in a fat cone of directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import (
    ComplexRoot,
    MarginalRegime,
    NoCoexistence,
    RegimeMismatch,
)
from .ode import OdeState, _fd_jacobian, _g, varrho
from .params import ModelParams, derive_ratios
from .policy import Family, Policy, propensity

#: Relative tolerance deciding that parameters sit on a regime boundary.
REGIME_TOL = 1e-9

#: Residual gate for re-verifying conjectural (deadly) rows.
CONJECTURE_RESIDUAL_TOL = 1e-8


class AttractorKind(Enum):
    BOUNDARY_NVDF = "nvdf"
    DISEASE_FREE = "disease-free"
    ORIGIN = "origin"
    INTERIOR = "interior"
    LIMIT_SET = "limit-set"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class Attractor:
    theta_hat: float
    psi_hat: float
    eta_hat: float
    kind: AttractorKind
    table_row: str
    clamp_active: bool
    conjectured: bool = False
    proven: bool = True  # False: returned formula lies outside the proven regime

    def point(self) -> tuple[float, float]:
        return (self.theta_hat, self.psi_hat)

    def ode_state(self) -> OdeState:
        return OdeState(self.theta_hat, self.psi_hat, self.eta_hat)


def _eta_at(theta: float, psi: float, params: ModelParams) -> float:
    return (params.b - params.d - params.d_e * theta) / varrho(theta, psi, params)


def _near(a: float, b: float, tol: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _guard(value: float, pivot: float, tol: float, what: str) -> None:
    if _near(value, pivot, tol):
        raise MarginalRegime(f"{what}: {value!r} sits on the boundary {pivot!r}")


def _clamp_policy_for_row(policy: Policy, beta_hat: float) -> Policy:
    if policy.beta == beta_hat:
        return policy
    return replace(policy, beta=beta_hat)


def coexistence_point(params: ModelParams) -> tuple[float, float]:
    """The saturated-acceptance equilibrium (1 - 1/rho - 1/(mu*rho), 1/(mu*rho)).

    Exists (theta_E > 0) iff mu*rho > mu + 1.  With nu = 0 the point
    degenerates continuously to the no-vaccination level (1 - 1/rho, 0).
    """
    ratios = derive_ratios(params)
    rho, mu = ratios.rho, ratios.mu
    if math.isinf(mu):
        if rho <= 1.0:
            raise NoCoexistence("rho <= 1 with no vaccination available")
        return (1.0 - 1.0 / rho, 0.0)
    if mu * rho <= mu + 1.0:
        raise NoCoexistence(
            f"mu*rho = {mu * rho!r} <= mu+1 = {mu + 1.0!r}: theta_E would not be positive"
        )
    psi_e = 1.0 / (mu * rho)
    theta_e = 1.0 - 1.0 / rho - psi_e
    return (theta_e, psi_e)


def _make(
    theta: float,
    psi: float,
    params: ModelParams,
    kind: AttractorKind,
    row: str,
    clamp: bool,
    conjectured: bool = False,
    proven: bool = True,
) -> Attractor:
    if not (0.0 <= theta <= 1.0 and 0.0 <= psi <= 1.0 and theta + psi <= 1.0):
        raise RegimeMismatch(
            f"row {row!r} produced a point outside the simplex: ({theta!r}, {psi!r})"
        )
    return Attractor(
        theta_hat=theta,
        psi_hat=psi,
        eta_hat=_eta_at(theta, psi, params),
        kind=kind,
        table_row=row,
        clamp_active=clamp,
        conjectured=conjectured,
        proven=proven,
    )


# --------------------------------------------------------------------------
# dispatch, non-deadly (d_e = 0)
# --------------------------------------------------------------------------


def _closed_form_fc(params, rho, mu, beta, tol) -> Attractor:
    if rho > 1.0:
        _guard(beta, mu * rho, tol, "beta vs mu*rho")
        if beta < mu * rho:
            return _make(1.0 - 1.0 / rho, 0.0, params, AttractorKind.BOUNDARY_NVDF, "fc/nvdf", False)
    else:
        _guard(beta, mu, tol, "beta vs mu")
        if beta < mu:
            return _make(0.0, 0.0, params, AttractorKind.ORIGIN, "fc/origin", False)
    # disease-free branch; acceptance at the candidate is beta - mu
    _guard(beta, mu + 1.0, tol, "disease-free acceptance vs clamp")
    if beta < mu + 1.0:
        return _make(
            0.0, 1.0 - mu / beta, params, AttractorKind.DISEASE_FREE, "fc/disease-free", False
        )
    _guard(mu * rho, mu + 1.0, tol, "mu*rho vs mu+1")
    if mu * rho < mu + 1.0:
        return _make(
            0.0,
            1.0 / (mu + 1.0),
            params,
            AttractorKind.DISEASE_FREE,
            "fc/disease-free-saturated",
            True,
        )
    th, ps = coexistence_point(params)
    return _make(th, ps, params, AttractorKind.INTERIOR, "fc/coexistence", True)


def _closed_form_fr(params, rho, mu, beta, tol) -> Attractor:
    if rho > 1.0:
        _guard(beta, mu * rho, tol, "beta vs mu*rho")
        if beta < mu * rho:
            return _make(1.0 - 1.0 / rho, 0.0, params, AttractorKind.BOUNDARY_NVDF, "fr/nvdf", False)
        _guard(beta, rho * rho * mu, tol, "beta vs rho^2*mu")
        if beta < rho * rho * mu:
            # candidate with infection and vaccination co-existing, clamp off
            q_int = mu * rho - (mu * rho) ** 2 / beta
            _guard(q_int, 1.0, tol, "interior acceptance vs clamp")
            if q_int < 1.0:
                return _make(
                    mu * rho / beta - 1.0 / rho,
                    1.0 - mu * rho / beta,
                    params,
                    AttractorKind.INTERIOR,
                    "fr/interior",
                    False,
                )
            th, ps = coexistence_point(params)
            return _make(th, ps, params, AttractorKind.INTERIOR, "fr/coexistence", True)
    else:
        _guard(beta, mu, tol, "beta vs mu")
        if beta < mu:
            return _make(0.0, 0.0, params, AttractorKind.ORIGIN, "fr/origin", False)
    q_df = math.sqrt(mu * beta) - mu
    _guard(q_df, 1.0, tol, "disease-free acceptance vs clamp")
    if q_df < 1.0:
        return _make(
            0.0,
            1.0 - math.sqrt(mu / beta),
            params,
            AttractorKind.DISEASE_FREE,
            "fr/disease-free",
            False,
        )
    _guard(mu * rho, mu + 1.0, tol, "mu*rho vs mu+1")
    if mu * rho < mu + 1.0:
        return _make(
            0.0,
            1.0 / (mu + 1.0),
            params,
            AttractorKind.DISEASE_FREE,
            "fr/disease-free-saturated",
            True,
        )
    th, ps = coexistence_point(params)
    return _make(th, ps, params, AttractorKind.INTERIOR, "fr/coexistence", True)


def _closed_form_vfc1(params, rho, mu, beta, tol) -> Attractor:
    if rho <= 1.0:
        # vigilance needs infection; the origin absorbs for every beta
        return _make(0.0, 0.0, params, AttractorKind.ORIGIN, "vfc1/origin", False)
    pivot = mu * rho * rho / (rho - 1.0)
    _guard(beta, pivot, tol, "beta vs mu*rho^2/(rho-1)")
    if beta < pivot:
        return _make(1.0 - 1.0 / rho, 0.0, params, AttractorKind.BOUNDARY_NVDF, "vfc1/nvdf", False)
    q_int = mu * rho - mu - (mu * rho) ** 2 / beta
    _guard(q_int, 1.0, tol, "interior acceptance vs clamp")
    if q_int < 1.0:
        proven = beta <= 2.0 * mu * rho * rho
        return _make(
            mu * rho / beta,
            1.0 - 1.0 / rho - mu * rho / beta,
            params,
            AttractorKind.INTERIOR,
            "vfc1/interior",
            False,
            proven=proven,
        )
    th, ps = coexistence_point(params)
    return _make(th, ps, params, AttractorKind.INTERIOR, "vfc1/coexistence", True)


# --------------------------------------------------------------------------
# dispatch, deadly (d_e > 0) -- conjectural, always residual-verified
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DeadlyQuadratic:
    """Coefficients of the deadly interior quadratic in x = 1 - psi."""

    a: float
    b: float
    c: float

    @classmethod
    def from_params(cls, params: ModelParams, beta_hat: float) -> "DeadlyQuadratic":
        a = params.d_e * beta_hat * params.nu
        b = -((params.r + params.b + params.d_e) * beta_hat * params.nu + params.d_e * params.lam)
        c = params.b * params.lam + params.d_e * (params.r + params.d_e)
        return cls(a=a, b=b, c=c)

    @property
    def discriminant(self) -> float:
        return self.b * self.b - 4.0 * self.a * self.c

    def roots(self) -> tuple[float, float]:
        disc = self.discriminant
        if disc < 0.0:
            raise ComplexRoot(f"discriminant {disc!r} < 0")
        s = math.sqrt(disc)
        return ((-self.b - s) / (2.0 * self.a), (-self.b + s) / (2.0 * self.a))


def deadly_coexistence_exact(params: ModelParams) -> tuple[float, float]:
    """Equilibrium with acceptance pinned at 1 and d_e > 0 (exact quadratic root)."""
    p = params
    if p.d_e <= 0.0:
        raise RegimeMismatch("requires d_e > 0")
    b_coef = p.lam * p.b + p.d_e * (p.r + p.d_e - p.lam - p.nu)
    disc = b_coef * b_coef + 4.0 * p.lam * p.d_e * p.nu * (p.r + p.b)
    if disc < 0.0:
        raise ComplexRoot(f"discriminant {disc!r} < 0")
    psi = (-b_coef + math.sqrt(disc)) / (2.0 * p.lam * p.d_e)
    rho_e = (p.lam - p.d_e) / (p.r + p.b)
    theta = 1.0 - 1.0 / rho_e - p.lam * psi / (p.lam - p.d_e)
    return (theta, psi)


def _nvdf_deadly_stable(params: ModelParams, beta: float) -> float:
    """Signed margin: positive when the deadly no-vaccination level is stable.

    Transverse vaccination growth at (1 - 1/rho_e, 0) is governed by
    beta*nu - d_e vs rho_e*(b - d_e); the union of conditions
    'rho_e*mu_e > 1 or beta*nu < b - d_e' collapses to this inequality.
    """
    rho_e = (params.lam - params.d_e) / (params.r + params.b)
    return rho_e * (params.b - params.d_e) - (beta * params.nu - params.d_e)


def _deadly_fc_interior_point(params: ModelParams, beta: float) -> tuple[float, float]:
    p = params
    theta = (p.lam * p.b - beta * p.nu * (p.r + p.b + p.d_e)) / (
        p.d_e * (p.lam - beta * p.nu)
    )
    rho = p.lam / (p.r + p.b + p.d_e)
    psi = 1.0 - theta * (1.0 - p.d_e / p.lam) - 1.0 / rho
    return theta, psi


def _deadly_fr_interior_point(params: ModelParams, beta: float) -> tuple[float, float]:
    quad = DeadlyQuadratic.from_params(params, beta)
    x_lo, x_hi = quad.roots()
    p = params
    rho_e = (p.lam - p.d_e) / (p.r + p.b)
    for x in (x_lo, x_hi):
        psi = 1.0 - x
        theta = 1.0 - 1.0 / rho_e - p.lam * psi / (p.lam - p.d_e)
        if 0.0 < psi < 1.0 and 0.0 < theta and theta + psi < 1.0:
            return theta, psi
    raise RegimeMismatch("no admissible root of the deadly interior quadratic")


def _verify_conjectured(attr: Attractor, params: ModelParams, policy: Policy) -> Attractor:
    ok, detail = verify_attractor(attr, params, policy, tol=CONJECTURE_RESIDUAL_TOL)
    if not ok:
        raise RegimeMismatch(f"conjectured point failed field verification: {detail}")
    return attr


def _deadly_saturated(params, rho, mu, tol, prefix) -> tuple[float, float, str]:
    """Pick between the saturated disease-free point and the deadly coexistence."""
    theta, psi = deadly_coexistence_exact(params)
    _guard(theta, 0.0, tol, "deadly coexistence theta_E vs 0")
    if theta > 0.0:
        return theta, psi, f"{prefix}/coexistence"
    _guard(mu * rho, mu + 1.0, tol, "mu*rho vs mu+1")
    return 0.0, 1.0 / (mu + 1.0), f"{prefix}/disease-free-saturated"


def _closed_form_fc_deadly(params, rho, mu, beta, tol, policy) -> Attractor:
    prefix = "fc-deadly"
    if rho > 1.0:
        _guard(beta, mu * rho, tol, "beta vs mu*rho")
        if beta < mu * rho:
            margin = _nvdf_deadly_stable(params, beta)
            _guard(margin, 0.0, tol, "deadly nvdf transverse margin")
            rho_e = (params.lam - params.d_e) / (params.r + params.b)
            if margin > 0.0:
                attr = _make(
                    1.0 - 1.0 / rho_e,
                    0.0,
                    params,
                    AttractorKind.BOUNDARY_NVDF,
                    f"{prefix}/nvdf",
                    False,
                    conjectured=True,
                )
                return _verify_conjectured(attr, params, policy)
            theta, psi = _deadly_fc_interior_point(params, beta)
            q_tilde = beta * psi
            _guard(q_tilde, 1.0, tol, "deadly interior acceptance vs clamp")
            if q_tilde < 1.0:
                attr = _make(
                    theta, psi, params, AttractorKind.INTERIOR, f"{prefix}/interior", False,
                    conjectured=True,
                )
                return _verify_conjectured(attr, params, policy)
            th, ps, row = _deadly_saturated(params, rho, mu, tol, prefix)
            kind = AttractorKind.INTERIOR if th > 0 else AttractorKind.DISEASE_FREE
            attr = _make(th, ps, params, kind, row, True, conjectured=True)
            return _verify_conjectured(attr, params, policy)
    else:
        _guard(beta, mu, tol, "beta vs mu")
        if beta < mu:
            attr = _make(
                0.0, 0.0, params, AttractorKind.ORIGIN, f"{prefix}/origin", False,
                conjectured=True,
            )
            return _verify_conjectured(attr, params, policy)
    q_df = beta - mu
    _guard(q_df, 1.0, tol, "disease-free acceptance vs clamp")
    if q_df < 1.0:
        attr = _make(
            0.0, 1.0 - mu / beta, params, AttractorKind.DISEASE_FREE,
            f"{prefix}/disease-free", False, conjectured=True,
        )
        return _verify_conjectured(attr, params, policy)
    th, ps, row = _deadly_saturated(params, rho, mu, tol, prefix)
    kind = AttractorKind.INTERIOR if th > 0 else AttractorKind.DISEASE_FREE
    attr = _make(th, ps, params, kind, row, True, conjectured=True)
    return _verify_conjectured(attr, params, policy)


def _closed_form_fr_deadly(params, rho, mu, beta, tol, policy) -> Attractor:
    prefix = "fr-deadly"
    if rho > 1.0:
        _guard(beta, mu * rho, tol, "beta vs mu*rho")
        if beta < mu * rho:
            margin = _nvdf_deadly_stable(params, beta)
            _guard(margin, 0.0, tol, "deadly nvdf transverse margin")
            rho_e = (params.lam - params.d_e) / (params.r + params.b)
            if margin > 0.0:
                attr = _make(
                    1.0 - 1.0 / rho_e, 0.0, params, AttractorKind.BOUNDARY_NVDF,
                    f"{prefix}/nvdf", False, conjectured=True,
                )
                return _verify_conjectured(attr, params, policy)
            theta, psi = _deadly_fr_interior_point(params, beta)
            q_tilde = beta * psi * (1.0 - psi)
            _guard(q_tilde, 1.0, tol, "deadly interior acceptance vs clamp")
            if q_tilde < 1.0:
                attr = _make(
                    theta, psi, params, AttractorKind.INTERIOR, f"{prefix}/interior",
                    False, conjectured=True,
                )
                return _verify_conjectured(attr, params, policy)
            th, ps, row = _deadly_saturated(params, rho, mu, tol, prefix)
            kind = AttractorKind.INTERIOR if th > 0 else AttractorKind.DISEASE_FREE
            attr = _make(th, ps, params, kind, row, True, conjectured=True)
            return _verify_conjectured(attr, params, policy)
        _guard(beta, rho * rho * mu, tol, "beta vs rho^2*mu")
        if beta < rho * rho * mu:
            theta, psi = _deadly_fr_interior_point(params, beta)
            q_tilde = beta * psi * (1.0 - psi)
            _guard(q_tilde, 1.0, tol, "deadly interior acceptance vs clamp")
            if q_tilde < 1.0:
                attr = _make(
                    theta, psi, params, AttractorKind.INTERIOR, f"{prefix}/interior",
                    False, conjectured=True,
                )
                return _verify_conjectured(attr, params, policy)
            th, ps, row = _deadly_saturated(params, rho, mu, tol, prefix)
            kind = AttractorKind.INTERIOR if th > 0 else AttractorKind.DISEASE_FREE
            attr = _make(th, ps, params, kind, row, True, conjectured=True)
            return _verify_conjectured(attr, params, policy)
    else:
        _guard(beta, mu, tol, "beta vs mu")
        if beta < mu:
            attr = _make(
                0.0, 0.0, params, AttractorKind.ORIGIN, f"{prefix}/origin", False,
                conjectured=True,
            )
            return _verify_conjectured(attr, params, policy)
    q_df = math.sqrt(mu * beta) - mu
    _guard(q_df, 1.0, tol, "disease-free acceptance vs clamp")
    if q_df < 1.0:
        attr = _make(
            0.0, 1.0 - math.sqrt(mu / beta), params, AttractorKind.DISEASE_FREE,
            f"{prefix}/disease-free", False, conjectured=True,
        )
        return _verify_conjectured(attr, params, policy)
    th, ps, row = _deadly_saturated(params, rho, mu, tol, prefix)
    kind = AttractorKind.INTERIOR if th > 0 else AttractorKind.DISEASE_FREE
    attr = _make(th, ps, params, kind, row, True, conjectured=True)
    return _verify_conjectured(attr, params, policy)


# --------------------------------------------------------------------------
# public entry points
# --------------------------------------------------------------------------


def closed_form(
    params: ModelParams,
    policy: Policy,
    beta_hat: Optional[float] = None,
    tol: float = REGIME_TOL,
) -> Attractor:
    """Dispatch (family, rho, mu, beta) onto the equilibrium catalogue.

    Raises MarginalRegime on any dispatch boundary and RegimeMismatch when a
    conjectured (deadly) formula fails its field re-verification.
    """
    beta = policy.beta if beta_hat is None else beta_hat
    policy = _clamp_policy_for_row(policy, beta)
    ratios = derive_ratios(params, beta)
    rho, mu = ratios.rho, ratios.mu
    _guard(rho, 1.0, tol, "rho vs 1")

    fam = policy.family
    if fam is Family.VFC2:
        raise RegimeMismatch(
            "threshold-vigilant policy has no point attractor catalogue; "
            "use vfc2_limit_set"
        )
    if fam not in (Family.FC, Family.FR, Family.VFC1):
        raise RegimeMismatch(f"no closed-form catalogue for family {fam}")

    if params.d_e > 0.0:
        if fam is Family.FC:
            return _closed_form_fc_deadly(params, rho, mu, beta, tol, policy)
        if fam is Family.FR:
            return _closed_form_fr_deadly(params, rho, mu, beta, tol, policy)
        raise RegimeMismatch("deadly catalogue covers FC and FR families only")

    if fam is Family.FC:
        return _closed_form_fc(params, rho, mu, beta, tol)
    if fam is Family.FR:
        return _closed_form_fr(params, rho, mu, beta, tol)
    return _closed_form_vfc1(params, rho, mu, beta, tol)


def deadly_interior(
    params: ModelParams,
    beta_hat: float,
    family: Family,
    tol: float = REGIME_TOL,
) -> Attractor:
    """Deadly interior equilibrium (unclamped acceptance), field-verified.

    Requires d_e > 0, an endemic load factor, and the no-vaccination level
    transversally unstable; for FR the mid-range mu*rho < beta < rho^2*mu
    also lands here.  The returned point is conjectural and has already
    passed the residual gate.
    """
    if params.d_e <= 0.0:
        raise RegimeMismatch("deadly interior requires d_e > 0")
    if family not in (Family.FC, Family.FR):
        raise RegimeMismatch("deadly interior covers FC and FR families only")
    attr = closed_form(params, Policy(family, beta=beta_hat), tol=tol)
    if attr.kind is not AttractorKind.INTERIOR or attr.clamp_active:
        raise RegimeMismatch(
            f"parameters select row {attr.table_row!r}, not the unclamped interior"
        )
    return attr


@dataclass(frozen=True)
class Vfc2Prediction:
    """Predicted oscillation centre of the threshold-vigilant limit set."""

    center_theta: float
    center_psi: float
    degenerate_fc: bool = False


def vfc2_limit_set(params: ModelParams, gamma: float) -> Vfc2Prediction:
    """Centre (Gamma, 1 - 1/rho - Gamma): the susceptible share pins at 1/rho.

    The band width around the centre is an observable of the simulation,
    not a prediction.  Gamma at or above the no-vaccination endemic level
    leaves the threshold unreachable.
    """
    ratios = derive_ratios(params)
    rho = ratios.rho
    if rho <= 1.0:
        raise RegimeMismatch("limit set requires an endemic load factor")
    nvdf = 1.0 - 1.0 / rho
    if gamma >= nvdf:
        raise RegimeMismatch(
            f"threshold {gamma!r} is unreachable: no-vaccination level is {nvdf!r}"
        )
    if gamma == 0.0:
        return Vfc2Prediction(center_theta=0.0, center_psi=nvdf, degenerate_fc=True)
    return Vfc2Prediction(center_theta=gamma, center_psi=nvdf - gamma)


# --------------------------------------------------------------------------
# verification and certification
# --------------------------------------------------------------------------


def verify_attractor(
    attr: Attractor,
    params: ModelParams,
    policy: Policy,
    tol: float = 1e-10,
) -> tuple[bool, str]:
    """Residual check of a tabulated point against the field.

    Interior components must vanish to ``tol``.  Components pinned at a
    simplex face must vanish identically with the transverse drift pointing
    inward (one-sided slope < 0).
    """
    y = np.array([attr.theta_hat, attr.psi_hat, attr.eta_hat])
    g = _g(y, params, policy, 0.0)
    h = 1e-8
    msgs = []
    for idx, name in ((0, "theta"), (1, "psi")):
        if y[idx] > 0.0:
            if abs(g[idx]) > tol:
                msgs.append(f"g_{name} = {g[idx]:.3e} at interior component")
        else:
            if g[idx] != 0.0 and abs(g[idx]) > tol:
                msgs.append(f"g_{name} = {g[idx]:.3e} on its zero face")
            probe = y.copy()
            probe[idx] = h
            slope = _g(probe, params, policy, 0.0)[idx] / h
            if slope >= 0.0:
                msgs.append(f"transverse drift of {name} not inward: {slope:.3e}")
    if abs(g[2]) > tol:
        msgs.append(f"g_eta = {g[2]:.3e}")
    return (not msgs, "; ".join(msgs) if msgs else "ok")


@dataclass(frozen=True)
class StabilityCertificate:
    eigen_max_real: float
    lyapunov_pass_fraction: float
    euclidean_pass_fraction: float
    marginal: bool
    on_discontinuity: bool
    n_samples: int
    radius_used: float = 1e-3

    @property
    def lyapunov_sample_pass(self) -> bool:
        return self.lyapunov_pass_fraction >= 0.99

    @property
    def passed(self) -> bool:
        return (
            not self.marginal
            and self.eigen_max_real < -1e-8
            and self.lyapunov_sample_pass
        )


def _feasible(y: np.ndarray) -> bool:
    return y[0] >= 0.0 and y[1] >= 0.0 and y[0] + y[1] <= 1.0 and y[2] > 0.0


def certify_stability(
    attr: Attractor,
    params: ModelParams,
    policy: Policy,
    radius: float = 1e-3,
    n_samples: int = 1000,
    seed: int = 0,
    min_radius: float = 1e-6,
) -> StabilityCertificate:
    """Numeric local-stability certificate at a point attractor.

    (a) eigenvalues of the finite-difference Jacobian (one-sided at faces);
    (b) sampling of the quadratic Lyapunov form from J'P + PJ = -I over a
    radius-``radius`` ball intersected with the simplex: the certificate
    passes when the form decreases along the field at >= 99% of samples.

    Weakly contracting equilibria can leave the quadratic regime inside the
    initial ball (cubic terms of the field flip a thin cone of directions);
    the sampling then retries at a tenth of the radius, down to
    ``min_radius``.  An actually unstable point keeps failing at every
    radius because its escape cone is a property of the linearisation.
    Clamp boundaries or thresholds inside the ball mark the certificate
    one-sided (``on_discontinuity``).
    """
    if attr.kind is AttractorKind.LIMIT_SET:
        raise RegimeMismatch("limit sets carry no point certificate")
    x_hat = np.array([attr.theta_hat, attr.psi_hat, attr.eta_hat])

    jac = _fd_jacobian(x_hat, params, policy)
    eigs = np.linalg.eigvals(jac)
    eig_max = float(np.max(eigs.real))
    marginal = abs(eig_max) <= 1e-8

    p_form = np.eye(3)
    if eig_max < 0.0:
        try:
            candidate = scipy.linalg.solve_continuous_lyapunov(jac.T, -np.eye(3))
            candidate = 0.5 * (candidate + candidate.T)
            if np.all(np.linalg.eigvalsh(candidate) > 0.0):
                p_form = candidate
        except Exception:
            pass

    r = radius
    result = None
    while True:
        result = _sample_lyapunov(
            attr, params, policy, x_hat, p_form, r, n_samples, seed
        )
        lyap_frac = result[0]
        if lyap_frac >= 0.99 or marginal or eig_max >= 0.0 or r <= min_radius * 10.0:
            break
        r /= 10.0
    lyap_frac, eucl_frac, on_disc, kept = result
    return StabilityCertificate(
        eigen_max_real=eig_max,
        lyapunov_pass_fraction=lyap_frac,
        euclidean_pass_fraction=eucl_frac,
        marginal=marginal,
        on_discontinuity=on_disc,
        n_samples=kept,
        radius_used=r,
    )


def _sample_lyapunov(attr, params, policy, x_hat, p_form, radius, n_samples, seed):
    rng = np.random.default_rng(seed)
    kept = 0
    lyap_neg = 0
    eucl_neg = 0
    on_disc = False
    q_sign_ref: Optional[bool] = None
    attempts = 0
    while kept < n_samples and attempts < 50 * n_samples:
        attempts += 1
        direction = rng.normal(size=3)
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            continue
        offset = direction / norm * radius * rng.random() ** (1.0 / 3.0)
        x = x_hat + offset
        if not _feasible(x):
            continue
        kept += 1
        z = x - x_hat
        gx = _g(x, params, policy, 0.0)
        if 2.0 * float(z @ (p_form @ gx)) < 0.0:
            lyap_neg += 1
        if 2.0 * float(z @ gx) < 0.0:
            eucl_neg += 1
        q_tilde = propensity(policy, min(max(x[0], 0.0), 1.0), min(max(x[1], 0.0), 1.0))
        side = q_tilde > 1.0
        if q_sign_ref is None:
            q_sign_ref = side
        elif side != q_sign_ref:
            on_disc = True
        if policy.family is Family.VFC2 and (x[0] > policy.gamma) != (
            attr.theta_hat > policy.gamma
        ):
            on_disc = True
    if kept == 0:
        raise RegimeMismatch("no feasible samples near the attractor")
    return lyap_neg / kept, eucl_neg / kept, on_disc, kept
