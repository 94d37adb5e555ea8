"""Event-driven simulation of the embedded population jump chain.

The continuous-time population process (infections at rate lam*I*S/N,
recoveries r*I, vaccination decisions nu*S, births b*N, natural deaths d per
head, excess deaths d_e*I) is observed at its transition epochs.  Dividing
each event rate by the total rate N*varrho, with

    varrho = b + d + d_e*theta + lam*theta*phi + nu*phi + r*theta,

gives state-dependent probabilities over eight event types that depend on
the fractions (theta, psi, phi) only, never on the absolute population size.
Declined vaccination decisions (NullDecision) are explicit epochs: varrho
carries the full nu*phi term, so epochs where the woken susceptible refuses
must be counted for the probabilities to normalise.

Alongside the integer counts the simulator tracks eta_k = N_k / k (eta_0 =
N(0)), freezes the whole state once eta_k <= delta (near-extinction paths
carry no limit information), and records two runtime diagnostics used by the
invariant suite: the minimum eta_k observed and the largest one-step jump of
1/eta_k measured in units of eps_k = 1/(k+1).  On every non-frozen path with
delta = 2/(N(0)-1) these obey

    eta_k >= delta_bar := (N(0)-3) / (N(0)-1)^2,
    |1/eta_{k+1} - 1/eta_k| <= eps_k * (delta_bar+1) / delta_bar^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import DegenerateState, FrozenTrajectory
from .params import ModelParams
from .policy import Family, Policy, accept_prob

_RNG_BLOCK = 1 << 16

RngLike = Union[np.random.Generator, int, None]


class Event(IntEnum):
    INFECTION = 0
    RECOVERY = 1
    DEATH_INFECTED = 2
    VACCINATION = 3
    NULL_DECISION = 4
    BIRTH = 5
    DEATH_VACCINATED = 6
    DEATH_SUSCEPTIBLE = 7


#: Count increments (dS, dI, dV, dN) per event.  Births enter susceptible;
#: recovery returns to susceptible (no lasting immunity).
EVENT_EFFECTS: dict[Event, tuple[int, int, int, int]] = {
    Event.INFECTION: (-1, +1, 0, 0),
    Event.RECOVERY: (+1, -1, 0, 0),
    Event.DEATH_INFECTED: (0, -1, 0, -1),
    Event.VACCINATION: (-1, 0, +1, 0),
    Event.NULL_DECISION: (0, 0, 0, 0),
    Event.BIRTH: (+1, 0, 0, +1),
    Event.DEATH_VACCINATED: (0, 0, -1, -1),
    Event.DEATH_SUSCEPTIBLE: (-1, 0, 0, -1),
}


@dataclass
class PopState:
    """Integer compartment counts at a transition epoch."""

    n_total: int
    n_susc: int
    n_inf: int
    n_vacc: int
    step: int = 0
    frozen: bool = False

    def __post_init__(self) -> None:
        if self.n_susc + self.n_inf + self.n_vacc != self.n_total:
            raise ValueError("S + I + V must equal N")
        if min(self.n_total, self.n_susc, self.n_inf, self.n_vacc) < 0:
            raise ValueError("counts must be non-negative")

    def fractions(self) -> "FractionState":
        eta = self.n_total / self.step if self.step >= 1 else float(self.n_total)
        return FractionState(
            theta=self.n_inf / self.n_total,
            psi=self.n_vacc / self.n_total,
            eta=eta,
        )


def make_initial(n0: int, theta0: float, psi0: float) -> PopState:
    """Round fractional targets to integer counts summing to n0."""
    if theta0 < 0 or psi0 < 0 or theta0 + psi0 > 1:
        raise ValueError("initial fractions must lie in the simplex")
    n_inf = round(n0 * theta0)
    n_vacc = round(n0 * psi0)
    n_susc = n0 - n_inf - n_vacc
    return PopState(n_total=n0, n_susc=n_susc, n_inf=n_inf, n_vacc=n_vacc)


@dataclass(frozen=True)
class FractionState:
    """Fractions (theta, psi) plus the population-per-epoch ratio eta."""

    theta: float
    psi: float
    eta: float

    @property
    def phi(self) -> float:
        return 1.0 - self.theta - self.psi


@dataclass(frozen=True)
class EventDistribution:
    """One-step event probabilities, indexed by :class:`Event`."""

    probs: np.ndarray
    varrho: float

    def __getitem__(self, event: Event) -> float:
        return float(self.probs[event])


def _event_masses(
    theta: float, psi: float, params: ModelParams, q: float
) -> np.ndarray:
    phi = 1.0 - theta - psi
    p = params
    return np.array(
        [
            p.lam * theta * phi,
            p.r * theta,
            (p.d + p.d_e) * theta,
            p.nu * q * phi,
            p.nu * (1.0 - q) * phi,
            p.b,
            p.d * psi,
            p.d * phi,
        ]
    )


def event_distribution(
    state: FractionState, params: ModelParams, policy: Policy
) -> EventDistribution:
    """Exact one-step event probabilities at the given fractions."""
    q = accept_prob(policy, state.theta, state.psi)
    masses = _event_masses(state.theta, state.psi, params, q)
    varrho = float(masses.sum())
    if varrho <= 0.0:
        raise DegenerateState("total event rate is zero")
    return EventDistribution(probs=masses / varrho, varrho=varrho)


def apply_event(state: PopState, event: Event) -> PopState:
    dS, dI, dV, dN = EVENT_EFFECTS[event]
    return PopState(
        n_total=state.n_total + dN,
        n_susc=state.n_susc + dS,
        n_inf=state.n_inf + dI,
        n_vacc=state.n_vacc + dV,
        step=state.step + 1,
        frozen=state.frozen,
    )


def sample_event(dist: EventDistribution, u: float) -> Event:
    """Map a uniform draw u in [0, 1) onto an event via cumulative masses."""
    acc = 0.0
    for event in Event:
        acc += dist.probs[event]
        if u < acc:
            return event
    return Event.DEATH_SUSCEPTIBLE


def step(
    state: PopState, params: ModelParams, policy: Policy, rng: np.random.Generator
) -> tuple[PopState, Event]:
    """Sample and apply one transition; the epoch index always advances."""
    if state.frozen:
        raise FrozenTrajectory("cannot step a frozen state")
    dist = event_distribution(state.fractions(), params, policy)
    event = sample_event(dist, float(rng.random()))
    return apply_event(state, event), event


@dataclass(frozen=True)
class ChainDiagnostics:
    """Runtime extrema backing the near-extinction bounds."""

    min_eta: float
    max_inv_eta_jump_ratio: float  # max over k of |1/eta_{k+1} - 1/eta_k| / eps_k
    n_steps: int
    n0: int
    delta: float

    @property
    def delta_bar(self) -> float:
        n0 = self.n0
        return (n0 - 3) / (n0 - 1) ** 2


@dataclass
class Trajectory:
    """Strided record of a single chain run."""

    epochs: np.ndarray
    theta: np.ndarray
    psi: np.ndarray
    eta: np.ndarray
    final: PopState
    frozen: bool
    freeze_epoch: Optional[int]
    diagnostics: ChainDiagnostics
    stride: int = 1

    def __len__(self) -> int:
        return len(self.epochs)


def _accept_fn(policy: Policy) -> Callable[[float, float], float]:
    """Resolve the policy into a bare (theta, psi) -> q closure for the hot loop."""
    fam = policy.family
    beta = policy.beta
    if fam is Family.FC:
        return lambda th, ps: min(1.0, beta * ps)
    if fam is Family.FR:
        return lambda th, ps: min(1.0, beta * ps * (1.0 - ps))
    if fam is Family.VFC1:
        return lambda th, ps: min(1.0, beta * th * ps)
    if fam is Family.VFC2:
        gamma = policy.gamma
        if policy.theta_variant:
            return lambda th, ps: min(1.0, beta * th) if th > gamma else 0.0
        return lambda th, ps: min(1.0, beta * ps) if th > gamma else 0.0
    if fam is Family.STATIC:
        q = policy.static_q
        return lambda th, ps: q
    assert policy.mutant_base is not None
    base = _accept_fn(policy.mutant_base)
    eps, p = policy.mutant_eps, policy.mutant_p
    return lambda th, ps: (1.0 - eps) * base(th, ps) + eps * p


def _as_rng(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def simulate(
    initial: PopState,
    params: ModelParams,
    policy: Policy,
    max_steps: int,
    delta: Optional[float] = None,
    stride: int = 1000,
    rng: RngLike = None,
) -> Trajectory:
    """Run the chain for max_steps epochs or until the extinction freeze fires.

    delta defaults to 2/(N(0)-1).  Fractions are recorded every ``stride``
    epochs plus at the final epoch.  The run is deterministic for a fixed
    integer seed.
    """
    gen = _as_rng(rng)
    n0 = initial.n_total
    if n0 < 2:
        raise ValueError("initial population must have at least 2 individuals")
    if delta is None:
        delta = 2.0 / (n0 - 1)
    if delta <= 0:
        raise ValueError("delta must be positive")

    lam, r, nu, b, d, de = (
        params.lam,
        params.r,
        params.nu,
        params.b,
        params.d,
        params.d_e,
    )
    d_plus_de = d + de
    qfun = _accept_fn(policy)

    N = initial.n_total
    S = initial.n_susc
    I = initial.n_inf
    V = initial.n_vacc
    k = initial.step

    eta = N / k if k >= 1 else float(N)
    inv_eta = 1.0 / eta
    min_eta = eta
    max_jump = 0.0

    ks: list[int] = [k]
    ths: list[float] = [I / N]
    pss: list[float] = [V / N]
    ets: list[float] = [eta]

    frozen = False
    freeze_epoch: Optional[int] = None

    buf = gen.random(_RNG_BLOCK)
    bi = 0

    while k < max_steps:
        if eta <= delta:
            frozen = True
            freeze_epoch = k
            break

        theta = I / N
        psi = V / N
        phi = 1.0 - theta - psi
        q = qfun(theta, psi)

        t_inf = lam * theta * phi
        t_dec = nu * phi
        t_vac = q * t_dec
        c1 = t_inf
        c2 = c1 + r * theta
        c3 = c2 + d_plus_de * theta
        c4 = c3 + t_vac
        c5 = c4 + (t_dec - t_vac)
        c6 = c5 + b
        c7 = c6 + d * psi
        varrho = c7 + d * phi
        if varrho <= 0.0:
            raise DegenerateState("total event rate is zero")

        if bi == _RNG_BLOCK:
            buf = gen.random(_RNG_BLOCK)
            bi = 0
        x = buf[bi] * varrho
        bi += 1

        if x < c1:
            S -= 1
            I += 1
        elif x < c2:
            I -= 1
            S += 1
        elif x < c3:
            I -= 1
            N -= 1
        elif x < c4:
            S -= 1
            V += 1
        elif x < c5:
            pass
        elif x < c6:
            S += 1
            N += 1
        elif x < c7:
            V -= 1
            N -= 1
        elif S > 0:  # guard against a 1-ulp overshoot at the last boundary
            S -= 1
            N -= 1

        k += 1
        eta = N / k
        new_inv = 1.0 / eta
        jump = abs(new_inv - inv_eta) * k  # eps_{k-1} = 1/k after the increment
        if jump > max_jump:
            max_jump = jump
        inv_eta = new_inv
        if eta < min_eta:
            min_eta = eta

        if k % stride == 0:
            ks.append(k)
            ths.append(I / N)
            pss.append(V / N)
            ets.append(eta)

    if ks[-1] != k:
        ks.append(k)
        ths.append(I / N)
        pss.append(V / N)
        ets.append(eta)

    final = PopState(
        n_total=N, n_susc=S, n_inf=I, n_vacc=V, step=k, frozen=frozen
    )
    diag = ChainDiagnostics(
        min_eta=min_eta,
        max_inv_eta_jump_ratio=max_jump,
        n_steps=k - initial.step,
        n0=n0,
        delta=delta,
    )
    return Trajectory(
        epochs=np.asarray(ks, dtype=np.int64),
        theta=np.asarray(ths),
        psi=np.asarray(pss),
        eta=np.asarray(ets),
        final=final,
        frozen=frozen,
        freeze_epoch=freeze_epoch,
        diagnostics=diag,
        stride=stride,
    )


@dataclass(frozen=True)
class LimitEstimate:
    """Tail-averaged limit fractions with their tail standard deviations."""

    theta: float
    psi: float
    eta: float
    theta_sd: float
    psi_sd: float
    eta_sd: float
    n_samples: int


def estimate_limit(traj: Trajectory, tail_fraction: float = 0.2) -> LimitEstimate:
    """Component-wise mean over the final tail_fraction of recorded samples."""
    if not 0.0 < tail_fraction < 1.0:
        raise ValueError("tail_fraction must lie in (0, 1)")
    if len(traj) == 0:
        raise ValueError("trajectory is empty")
    if traj.frozen:
        raise FrozenTrajectory(
            f"trajectory froze at epoch {traj.freeze_epoch}; no stationary tail"
        )
    start = int(math.floor(len(traj) * (1.0 - tail_fraction)))
    start = min(start, len(traj) - 1)
    th = traj.theta[start:]
    ps = traj.psi[start:]
    et = traj.eta[start:]
    return LimitEstimate(
        theta=float(th.mean()),
        psi=float(ps.mean()),
        eta=float(et.mean()),
        theta_sd=float(th.std()),
        psi_sd=float(ps.std()),
        eta_sd=float(et.std()),
        n_samples=len(th),
    )


def one_step_drift(
    state: FractionState, k: int, params: ModelParams, policy: Policy
) -> np.ndarray:
    """Exact conditional one-step drift E_k[L_{k+1}] of (theta, psi, eta).

    Valid for epochs k >= 1, where eta follows the recursion
    eta_{k+1} = eta_k + eps_k * (G_N - eta_k) with eps_k = 1/(k+1).
    The theta/psi components weight each event's increment by the
    event-dependent 1/eta_{k+1}; the eta component reduces to
    (b - d - d_e*theta)/varrho - eta exactly.
    """
    if k < 1:
        raise ValueError("drift recursion requires k >= 1")
    dist = event_distribution(state, params, policy)
    eps_k = 1.0 / (k + 1)
    drift = np.zeros(3)
    for event in Event:
        p = dist.probs[event]
        if p == 0.0:
            continue
        dS, dI, dV, dN = EVENT_EFFECTS[event]
        eta_next = state.eta + eps_k * (dN - state.eta)
        drift[0] += p * (dI - dN * state.theta) / eta_next
        drift[1] += p * (dV - dN * state.psi) / eta_next
        drift[2] += p * (dN - state.eta)
    return drift


def count_crossings(values: Sequence[float], level: float) -> int:
    """Number of strict sign changes of (value - level) along the sequence."""
    signs = [1 if v > level else -1 for v in values if v != level]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV export with header k,theta,psi,eta at 17 significant digits."""
    with open(path, "w") as fh:
        fh.write("k,theta,psi,eta\n")
        for k, th, ps, et in zip(traj.epochs, traj.theta, traj.psi, traj.eta):
            fh.write(f"{int(k)},{th:.17g},{ps:.17g},{et:.17g}\n")
