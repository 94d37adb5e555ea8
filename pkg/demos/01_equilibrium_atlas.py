"""Where does the epidemic settle for each vaccination response?

Sweeps the behaviour parameter for the three response families under two
contrasting rate settings and prints the closed-form equilibrium rows.
With a strong contact rate every family ends at the shared co-existence
point once acceptance saturates; in the weakly endemic setting the
crowd-following and free-riding families can eradicate the disease, while
the vigilant family never does.
"""

import numpy as np

from vaxgame import Family, ModelParams, Policy, closed_form
from vaxgame.errors import MarginalRegime

SETTINGS = {
    "strongly endemic": ModelParams(lam=8.549, r=1.188, nu=0.904, b=0.322, d=0.1),
    "weakly endemic": ModelParams(lam=1.749, r=1.0002, nu=0.404, b=0.322, d=0.1),
}


def main() -> None:
    for name, params in SETTINGS.items():
        rho = params.lam / (params.r + params.b)
        mu = params.b / params.nu
        print(f"\n=== {name}: rho = {rho:.4f}, mu = {mu:.4f}, "
              f"mu*rho = {mu * rho:.4f}, mu+1 = {mu + 1:.4f} ===")
        print(f"{'family':>6} {'beta':>6} {'row':<28} {'theta_hat':>10} {'psi_hat':>10} clamp")
        for family in (Family.FC, Family.FR, Family.VFC1):
            for beta in np.concatenate([np.arange(0.5, 4.01, 0.5), [6.0, 9.0]]):
                try:
                    att = closed_form(params, Policy(family, beta=float(beta)))
                except MarginalRegime:
                    continue
                print(
                    f"{family.value:>6} {beta:6.2f} {att.table_row:<28} "
                    f"{att.theta_hat:10.6f} {att.psi_hat:10.6f} "
                    f"{'on' if att.clamp_active else 'off'}"
                )


if __name__ == "__main__":
    main()
