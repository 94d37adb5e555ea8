"""Mean-field dynamics of the fraction process and its equilibria.

The jump chain's conditional one-step drift, rescaled by eps_k = 1/(k+1),
is approximated by the vector field g over Upsilon = (theta, psi, eta):

    g_theta = theta * 1{eta > delta} / (eta * varrho)
              * [phi*lam - r - d_e - (b - d_e*theta)]
    g_psi   = 1{eta > delta} / (eta * varrho)
              * [q(theta, psi)*phi*nu - (b - d_e*theta)*psi]
    g_eta   = 1{eta > delta} * [(b - d - d_e*theta)/varrho - eta]

with phi = 1 - theta - psi, q the clamped acceptance probability, and
varrho as in :mod:`vaxgame.chain`.  The extinction indicator is treated as
always-on during mean-field analysis (delta defaults to 0; with b > d + d_e
eta stays far above any realistic freeze level); the frozen branch exists
for parity with the chain.

Integration uses an adaptive explicit Runge-Kutta pair.  For the
threshold-vigilant policy the indicator 1{theta > Gamma} makes the field
discontinuous; crossings are located with a terminal event, the integrator
hops strictly across before re-arming, and the run is cut short once
crossings accumulate into the sliding regime on the threshold.  No
smoothing is applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DegenerateState, IndicatorNonstationary, StepFailure
from .params import ModelParams
from .policy import Family, Policy, accept_prob

#: Residual norm below which a point counts as an equilibrium.
EQUILIBRIUM_TOL = 1e-10

#: Number of consecutive accepted steps with small residual that ends an
#: open-horizon integration early.
_QUIET_STEPS = 100

_MAX_TIME = 1.0e6


@dataclass(frozen=True)
class OdeState:
    theta: float
    psi: float
    eta: float
    t: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.psi, self.eta])


def varrho(theta: float, psi: float, params: ModelParams) -> float:
    phi = 1.0 - theta - psi
    return (
        params.b
        + params.d
        + params.d_e * theta
        + params.lam * theta * phi
        + params.nu * phi
        + params.r * theta
    )


def _g(y, params: ModelParams, policy: Policy, delta: float) -> np.ndarray:
    theta, psi, eta = float(y[0]), float(y[1]), float(y[2])
    if eta <= delta:
        return np.zeros(3)
    # trial stages of the adaptive solver probe outside the simplex; evaluate
    # at the projection so the field stays bounded (identical on-domain,
    # where accepted steps live)
    theta = min(max(theta, 0.0), 1.0)
    psi = min(max(psi, 0.0), 1.0)
    total = theta + psi
    if total > 1.0:
        theta /= total
        psi /= total
    eta = max(eta, 1e-12)
    phi = 1.0 - theta - psi
    rho_total = varrho(theta, psi, params)
    if rho_total <= 0.0:
        raise DegenerateState("varrho vanished")
    q = accept_prob(policy, theta, psi)
    scale = 1.0 / (eta * rho_total)
    net_birth = params.b - params.d_e * theta
    g_theta = theta * scale * (phi * params.lam - params.r - params.d_e - net_birth)
    g_psi = scale * (q * phi * params.nu - net_birth * psi)
    g_eta = (params.b - params.d - params.d_e * theta) / rho_total - eta
    return np.array([g_theta, g_psi, g_eta])


def rhs(
    state: OdeState, params: ModelParams, policy: Policy, delta: float = 0.0
) -> np.ndarray:
    """Vector field g(Upsilon) at the given state."""
    return _g(state.as_array(), params, policy, delta)


@dataclass
class OdePath:
    """Sampled solution of the mean-field ODE."""

    t: np.ndarray
    states: np.ndarray  # shape (n, 3)
    endpoint: OdeState
    settled: bool  # residual stayed below EQUILIBRIUM_TOL for _QUIET_STEPS steps
    n_segments: int = 1
    zeno_truncated: bool = False  # threshold crossings accumulated; run cut short


def _project_simplex(y: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Clip rounding-level excursions; anything larger is an integrator bug."""
    theta, psi, eta = y
    if theta < -tol or psi < -tol or theta + psi > 1.0 + tol:
        raise StepFailure(f"state left the simplex: {y!r}")
    theta = min(max(theta, 0.0), 1.0)
    psi = min(max(psi, 0.0), 1.0)
    if theta + psi > 1.0:
        excess = theta + psi - 1.0
        theta -= excess * 0.5
        psi -= excess * 0.5
    return np.array([theta, psi, max(eta, 1e-300)])


def integrate(
    initial: OdeState,
    params: ModelParams,
    policy: Policy,
    horizon: float,
    rtol: float = 1e-12,
    atol: float = 1e-14,
    stop_at_equilibrium: bool = True,
    method: str = "DOP853",
) -> OdePath:
    """Integrate the mean-field ODE from ``initial`` for ``horizon`` time units.

    Integration proceeds in geometrically growing chunks so that, when
    ``stop_at_equilibrium`` is set, the run ends as soon as the residual has
    stayed below EQUILIBRIUM_TOL for 100 consecutive accepted steps (the
    default tolerances are tight enough for the numerical orbit to reach
    that floor); t is capped at 1e6 regardless.  Threshold crossings of the
    vigilant policy are located by a terminal event and the solver restarts
    across them.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    y = _project_simplex(initial.as_array())
    t0 = initial.t
    t_end = min(t0 + horizon, t0 + _MAX_TIME)

    def field(t, y):
        return _g(y, params, policy, 0.0)

    events = None
    if policy.family is Family.VFC2:
        gamma = policy.gamma

        def crossing(t, y):
            return y[0] - gamma

        crossing.terminal = True
        crossing.direction = 0
        events = [crossing]

    ts: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    quiet = 0
    settled = False
    n_segments = 0
    chunk = 2.0
    tiny_segments = 0
    zeno = False

    t = t0
    while t < t_end and not settled:
        t_next = min(t + chunk, t_end)
        sol = solve_ivp(
            field,
            (t, t_next),
            y,
            method=method,
            rtol=rtol,
            atol=atol,
            events=events,
            dense_output=False,
        )
        if not sol.success and sol.status != 1:
            raise StepFailure(f"integrator failed at t={t:.6g}: {sol.message}")
        n_segments += 1
        ts.append(sol.t)
        ys.append(sol.y.T)

        if stop_at_equilibrium:
            for row in sol.y.T:
                res = float(np.max(np.abs(_g(row, params, policy, 0.0))))
                quiet = quiet + 1 if res < EQUILIBRIUM_TOL else 0
                if quiet >= _QUIET_STEPS:
                    settled = True
                    break

        progress = sol.t[-1] - t
        t = sol.t[-1]
        y = _project_simplex(sol.y[:, -1])

        if sol.status == 1 and not settled and t < t_end:
            # landed on the threshold; hop strictly across before re-arming
            # the event, otherwise the restart re-fires at zero progress
            t, y = _hop_across(field, t, y, policy.gamma, t_end)
            ts.append(np.array([t]))
            ys.append(y[None, :])
            # the switching surface is attracting: orbits spiral into the
            # centre with geometrically accumulating crossings and then
            # chatter-slide along theta = Gamma; once inter-event progress
            # stays far below any genuine half-cycle, stop the run there
            tiny_segments = tiny_segments + 1 if progress < 1e-3 else 0
            if tiny_segments >= 50 or n_segments >= 100_000:
                zeno = True
                break
        elif sol.status == 0:
            chunk = min(chunk * 2.0, 256.0)

    t_all = np.concatenate(ts)
    y_all = np.vstack(ys)
    endpoint = OdeState(theta=y[0], psi=y[1], eta=y[2], t=float(t))
    return OdePath(
        t=t_all,
        states=y_all,
        endpoint=endpoint,
        settled=settled,
        n_segments=n_segments,
        zeno_truncated=zeno,
    )


def _hop_across(field, t, y, gamma, t_end, clearance: float = 1e-12):
    """RK4 micro-steps until theta is strictly clear of the threshold."""
    h = 1e-9 * max(1.0, abs(t))
    for _ in range(64):
        if abs(y[0] - gamma) > clearance or t >= t_end:
            return t, _project_simplex(y)
        h = min(h, t_end - t)
        k1 = field(t, y)
        k2 = field(t + h / 2, y + h / 2 * k1)
        k3 = field(t + h / 2, y + h / 2 * k2)
        k4 = field(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
        h *= 2.0
    # tangential touch: push through with the plain fixed-step fallback
    return _fixed_step_advance(field, t, y, t_end)


def _fixed_step_advance(field, t, y, t_end, n_steps: int = 200):
    """Classical RK4 micro-steps to push past an event-chatter point."""
    h = min(1e-6, (t_end - t) / n_steps)
    if h <= 0:
        return t, y
    for _ in range(n_steps):
        k1 = field(t, y)
        k2 = field(t + h / 2, y + h / 2 * k1)
        k3 = field(t + h / 2, y + h / 2 * k2)
        k4 = field(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return t, _project_simplex(y)


@dataclass(frozen=True)
class EquilibriumResult:
    state: OdeState
    residual: float
    converged: bool


def _fd_jacobian(y, params, policy, rel_step: float = 1e-7) -> np.ndarray:
    """Finite-difference Jacobian of g, stepping only inside the admissible set.

    Central differences in the interior; second-order one-sided stencils
    against a simplex face, so boundary attractors get O(h^2) accuracy too.
    """

    def geval(point):
        return _g(point, params, policy, 0.0)

    n = len(y)
    jac = np.zeros((n, n))
    for j in range(n):
        h = rel_step * max(1.0, abs(y[j]))
        lo_blocked = j < 2 and y[j] - h < 0.0
        hi_blocked = j < 2 and (y[0] + y[1] + h > 1.0 or y[j] + h > 1.0)
        if not lo_blocked and not hi_blocked:
            up, dn = y.copy(), y.copy()
            up[j] += h
            dn[j] -= h
            jac[:, j] = (geval(up) - geval(dn)) / (2.0 * h)
        elif not hi_blocked:
            p1, p2 = y.copy(), y.copy()
            p1[j] += h
            p2[j] += 2.0 * h
            jac[:, j] = (-3.0 * geval(y) + 4.0 * geval(p1) - geval(p2)) / (2.0 * h)
        elif not lo_blocked:
            p1, p2 = y.copy(), y.copy()
            p1[j] -= h
            p2[j] -= 2.0 * h
            jac[:, j] = (3.0 * geval(y) - 4.0 * geval(p1) + geval(p2)) / (2.0 * h)
        # a column blocked on both sides stays zero (degenerate face width)
    return jac


def find_equilibrium(
    guess: OdeState,
    params: ModelParams,
    policy: Policy,
    residual_tol: float = EQUILIBRIUM_TOL,
    max_newton: int = 60,
) -> EquilibriumResult:
    """Damped Newton on g, with a long-horizon integration fallback.

    Raises IndicatorNonstationary for a threshold-vigilant policy whose
    threshold is dynamically reachable (Gamma below the no-vaccination
    endemic level): the limit object there is a switching limit set around
    the threshold, not a zero of either one-sided field.
    """
    if policy.family is Family.VFC2:
        rho = params.lam / (params.r + params.b + params.d_e)
        if rho > 1.0 and policy.gamma < 1.0 - 1.0 / rho:
            raise IndicatorNonstationary(
                "threshold policy with reachable Gamma has no fixed point"
            )

    y = _project_simplex(guess.as_array())
    best_y = y
    best_res = float(np.max(np.abs(_g(y, params, policy, 0.0))))

    for attempt in range(3):
        y, res = _newton(y, params, policy, residual_tol, max_newton)
        if res < best_res:
            best_y, best_res = y, res
        if best_res < residual_tol:
            break
        # re-seed Newton from a relaxed trajectory
        path = integrate(
            OdeState(*y, t=0.0),
            params,
            policy,
            horizon=10.0 ** (2 + attempt),
            rtol=1e-10,
            atol=1e-12,
        )
        y = path.endpoint.as_array()

    state = OdeState(theta=best_y[0], psi=best_y[1], eta=best_y[2], t=guess.t)
    return EquilibriumResult(
        state=state, residual=best_res, converged=best_res < residual_tol
    )


def _newton(y, params, policy, residual_tol, max_newton):
    res_vec = _g(y, params, policy, 0.0)
    res = float(np.max(np.abs(res_vec)))
    for _ in range(max_newton):
        if res < residual_tol:
            break
        jac = _fd_jacobian(y, params, policy)
        try:
            delta = np.linalg.solve(jac, -res_vec)
        except np.linalg.LinAlgError:
            delta = -np.linalg.lstsq(jac, res_vec, rcond=None)[0]
        step = 1.0
        improved = False
        for _ in range(30):
            trial = y + step * delta
            trial[0] = min(max(trial[0], 0.0), 1.0)
            trial[1] = min(max(trial[1], 0.0), 1.0)
            if trial[0] + trial[1] > 1.0:
                overflow = trial[0] + trial[1] - 1.0
                trial[0] -= overflow * 0.5
                trial[1] -= overflow * 0.5
            trial[2] = max(trial[2], 1e-12)
            trial_vec = _g(trial, params, policy, 0.0)
            trial_res = float(np.max(np.abs(trial_vec)))
            if trial_res < res or trial_res < residual_tol:
                y, res_vec, res = trial, trial_vec, trial_res
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return y, res


def write_path_csv(path: OdePath, file) -> None:
    """CSV export with header t,theta,psi,eta at 17 significant digits."""
    with open(file, "w") as fh:
        fh.write("t,theta,psi,eta\n")
        for t, row in zip(path.t, path.states):
            fh.write(f"{t:.17g},{row[0]:.17g},{row[1]:.17g},{row[2]:.17g}\n")
