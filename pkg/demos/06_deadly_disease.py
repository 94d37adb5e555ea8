"""Excess deaths reshape the equilibria; the formulas stay field-verified.

With d_e > 0 the no-vaccination level moves to 1 - 1/rho_e, the interior
rows come from a quadratic, and every catalogue output is re-verified
against the field before being reported (the rows are conjectural).  The
saturated-acceptance equilibrium has an exact root and a small-d_e
approximation whose error grows like (d_e/b) * psi.
"""

import numpy as np

from vaxgame import (
    CostParams,
    Family,
    ModelParams,
    classify_ess,
    closed_form,
    deadly_es_equilibrium,
    fc,
    verify_attractor,
)

COSTS = CostParams(c_v1=1.0, c_v2=0.3, c_v2_bar=1.0, c_I1=10.0, c_I2=1.0)


def main() -> None:
    params = ModelParams(lam=2.0, r=0.3, nu=1.0, b=0.6, d=0.2, d_e=0.15)
    print("=== catalogue rows under excess deaths (all field-verified) ===")
    for beta in (0.3, 1.1, 2.0):
        att = closed_form(params, fc(beta))
        ok, _ = verify_attractor(att, params, fc(beta), tol=1e-8)
        print(
            f"  beta = {beta}: {att.table_row:<28} "
            f"({att.theta_hat:.5f}, {att.psi_hat:.5f})  "
            f"conjectured = {att.conjectured}, residual check = {'ok' if ok else 'FAILED'}"
        )

    print("\n=== saturated equilibrium: exact root vs small-d_e approximation ===")
    base = dict(lam=8.549, r=1.188, nu=0.904, b=0.322, d=0.1)
    for ratio in (1e-4, 0.01, 0.05):
        deadly = ModelParams(**base, d_e=ratio * base["b"])
        eq = deadly_es_equilibrium(deadly, COSTS)
        rel = abs(eq.psi_approx - eq.psi_exact) / eq.psi_exact
        print(
            f"  d_e = {ratio:.4f}*b: exact ({eq.theta_exact:.5f}, {eq.psi_exact:.5f}), "
            f"approx ({eq.theta_approx:.5f}, {eq.psi_approx:.5f}), "
            f"root error {rel:.2e}, o-factor {eq.o_factor:.5f}"
        )

    print("\n=== verdict with a deadly disease (conjectured) ===")
    deadly = ModelParams(**base, d_e=0.02)
    scare = CostParams(c_v1=2.88, c_v2=0.65, c_v2_bar=1.91, c_I1=40.0, c_I2=5.0)
    verdict = classify_ess(Family.FC, deadly, scare)
    print(
        f"  {verdict.kind.value} at ({verdict.equilibrium[0]:.4f}, "
        f"{verdict.equilibrium[1]:.4f}), h = {verdict.h_value:+.3f}, "
        f"conjectured = {verdict.conjectured}"
    )


if __name__ == "__main__":
    main()
