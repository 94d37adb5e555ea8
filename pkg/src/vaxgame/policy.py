"""Vaccination-response families.

A policy maps the observable fractions (theta = infected share, psi =
vaccinated share) to the probability that a susceptible accepts vaccination
at a decision epoch:

  FC      q~ = beta * psi                    follow the crowd
  FR      q~ = beta * psi * (1 - psi)        free riding beyond a crowd size
  VFC1    q~ = beta * theta * psi            vigilant follow-the-crowd
  VFC2    q~ = beta * psi * 1{theta > Gamma} threshold-vigilant
  STATIC  q~ = q                             state-independent
  MUTANT  epsilon-mixture of a base policy with a static probability

The acceptance probability is the clamp ``q = min(1, q~)``.  For MUTANT the
mixture is taken at the probability level, i.e. the base propensity is
clamped *before* mixing: ``q = (1-eps) * min(1, q~_base) + eps * p``.  Mixing
first and clamping after would give a different (smaller) mutant response
whenever the base propensity exceeds 1.

VFC2 exposes a variant with propensity ``beta * theta * 1{theta > Gamma}``
behind ``theta_variant=True``; the psi-coupled form is the default because
it is the one whose on/off vaccination cycling we reproduce.  The indicator
is strict: at ``theta == Gamma`` it evaluates false.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import DomainError

#: Inputs this far outside [0, 1] raise DomainError; closer ones are clamped
#: (adaptive integrators legitimately wander by rounding error).
_EDGE_TOL = 1e-9


class Family(Enum):
    FC = "FC"
    FR = "FR"
    VFC1 = "VFC1"
    VFC2 = "VFC2"
    STATIC = "STATIC"
    MUTANT = "MUTANT"


@dataclass(frozen=True)
class Policy:
    family: Family
    beta: float = 0.0
    gamma: float = 0.0
    static_q: float = 0.0
    mutant_base: Optional["Policy"] = None
    mutant_p: float = 0.0
    mutant_eps: float = 0.0
    theta_variant: bool = False  # VFC2 only: propensity beta*theta instead of beta*psi

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise DomainError(f"beta must be non-negative, got {self.beta!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise DomainError(f"gamma must lie in [0, 1], got {self.gamma!r}")
        if not 0.0 <= self.static_q <= 1.0:
            raise DomainError(f"static q must lie in [0, 1], got {self.static_q!r}")
        if not 0.0 <= self.mutant_eps <= 1.0:
            raise DomainError(f"eps must lie in [0, 1], got {self.mutant_eps!r}")
        if not 0.0 <= self.mutant_p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {self.mutant_p!r}")
        if self.family is Family.MUTANT:
            if self.mutant_base is None:
                raise DomainError("MUTANT requires a base policy")
            if self.mutant_base.family is Family.MUTANT:
                raise DomainError("mutants of mutants are not allowed")

    def describe(self) -> str:
        if self.family is Family.STATIC:
            return f"STATIC(q={self.static_q:g})"
        if self.family is Family.MUTANT:
            assert self.mutant_base is not None
            return (
                f"MUTANT(base={self.mutant_base.describe()}, "
                f"p={self.mutant_p:g}, eps={self.mutant_eps:g})"
            )
        if self.family is Family.VFC2:
            return f"VFC2(beta={self.beta:g}, gamma={self.gamma:g})"
        return f"{self.family.value}(beta={self.beta:g})"


def fc(beta: float) -> Policy:
    return Policy(Family.FC, beta=beta)


def fr(beta: float) -> Policy:
    return Policy(Family.FR, beta=beta)


def vfc1(beta: float) -> Policy:
    return Policy(Family.VFC1, beta=beta)


def vfc2(beta: float, gamma: float, theta_variant: bool = False) -> Policy:
    return Policy(Family.VFC2, beta=beta, gamma=gamma, theta_variant=theta_variant)


def static(q: float) -> Policy:
    return Policy(Family.STATIC, static_q=q)


def mutant(base: Policy, p: float, eps: float) -> Policy:
    return Policy(Family.MUTANT, mutant_base=base, mutant_p=p, mutant_eps=eps)


def _check_fraction(value: float, name: str) -> float:
    if value < -_EDGE_TOL or value > 1.0 + _EDGE_TOL:
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return min(1.0, max(0.0, value))


def propensity(policy: Policy, theta: float, psi: float) -> float:
    """Unclamped propensity q~(theta, psi) >= 0."""
    theta = _check_fraction(theta, "theta")
    psi = _check_fraction(psi, "psi")
    fam = policy.family
    if fam is Family.FC:
        return policy.beta * psi
    if fam is Family.FR:
        return policy.beta * psi * (1.0 - psi)
    if fam is Family.VFC1:
        return policy.beta * theta * psi
    if fam is Family.VFC2:
        if theta <= policy.gamma:
            return 0.0
        driver = theta if policy.theta_variant else psi
        return policy.beta * driver
    if fam is Family.STATIC:
        return policy.static_q
    assert fam is Family.MUTANT and policy.mutant_base is not None
    base = propensity(policy.mutant_base, theta, psi)
    return (1.0 - policy.mutant_eps) * base + policy.mutant_eps * policy.mutant_p


def accept_prob(policy: Policy, theta: float, psi: float) -> float:
    """Acceptance probability q = min(1, q~); mutants mix clamped base with p."""
    if policy.family is Family.MUTANT:
        assert policy.mutant_base is not None
        theta = _check_fraction(theta, "theta")
        psi = _check_fraction(psi, "psi")
        base_q = accept_prob(policy.mutant_base, theta, psi)
        return (1.0 - policy.mutant_eps) * base_q + policy.mutant_eps * policy.mutant_p
    return min(1.0, propensity(policy, theta, psi))
