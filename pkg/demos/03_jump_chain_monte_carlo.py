"""Simulate the exact population jump chain and tail-average the fractions.

Three replications of a 40000-individual population over two million
transition epochs, for a no-vaccination endemic regime and a saturated
co-existence regime.  The tail averages land within the Monte-Carlo gate
(0.02) of the closed-form equilibria, and the near-extinction diagnostics
stay inside their guaranteed bounds.
"""

import time

from vaxgame import ModelParams, closed_form, estimate_limit, fc, make_initial, simulate

PARAMS = ModelParams(lam=8.549, r=1.188, nu=0.904, b=0.322, d=0.1)
RUNS = [
    ("no-vaccination endemic", fc(0.5), (0.1, 0.01)),
    ("saturated co-existence", fc(3.0), (0.30, 0.45)),
]


def main() -> None:
    for name, policy, (theta0, psi0) in RUNS:
        att = closed_form(PARAMS, policy)
        print(f"\n{name}: target ({att.theta_hat:.4f}, {att.psi_hat:.4f})")
        for rep in range(3):
            t0 = time.perf_counter()
            traj = simulate(
                make_initial(40000, theta0, psi0),
                PARAMS,
                policy,
                max_steps=2_000_000,
                stride=1000,
                rng=100 + rep,
            )
            est = estimate_limit(traj, tail_fraction=0.2)
            diag = traj.diagnostics
            bound = (diag.delta_bar + 1.0) / diag.delta_bar**2
            print(
                f"  rep {rep}: tail = ({est.theta:.4f} +- {est.theta_sd:.4f}, "
                f"{est.psi:.4f} +- {est.psi_sd:.4f})  "
                f"err = ({abs(est.theta - att.theta_hat):.4f}, "
                f"{abs(est.psi - att.psi_hat):.4f})  "
                f"min eta {diag.min_eta:.3f} >= {diag.delta_bar:.2e}, "
                f"jump ratio {diag.max_inv_eta_jump_ratio:.1f} <= {bound:.2e}  "
                f"[{time.perf_counter() - t0:.1f}s]"
            )


if __name__ == "__main__":
    main()
