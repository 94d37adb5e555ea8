"""Integrate the mean-field dynamics and compare against the catalogue.

For a spread of behaviour parameters, the adaptive integrator is started
from a common initial mix and run until the field residual stays below
1e-10; the endpoint should match the closed-form equilibrium to a few
decimal places more than the 1e-4 cross-validation gate.
"""

from vaxgame import ModelParams, OdeState, closed_form, fc, fr, integrate, vfc1

PARAMS = ModelParams(lam=8.549, r=1.188, nu=0.904, b=0.322, d=0.1)


def main() -> None:
    print("policy        endpoint (theta, psi)      closed form             max err")
    for policy in (fc(0.5), fc(3.0), fr(3.0), fr(6.0), vfc1(4.0), vfc1(8.0)):
        att = closed_form(PARAMS, policy)
        path = integrate(OdeState(0.3, 0.2, 1.0), PARAMS, policy, horizon=1e4)
        err = max(
            abs(path.endpoint.theta - att.theta_hat),
            abs(path.endpoint.psi - att.psi_hat),
        )
        print(
            f"{policy.describe():<12} ({path.endpoint.theta:.8f}, {path.endpoint.psi:.8f})"
            f"  ({att.theta_hat:.8f}, {att.psi_hat:.8f})  {err:.2e}"
            f"  [{att.table_row}{', settled' if path.settled else ''}]"
        )


if __name__ == "__main__":
    main()
