"""Which vaccination responses survive invasion by static mutants?

First the verdicts at two cost scales: under the reference costs the
perceived infection risk never outweighs price plus hesitancy, so
never-vaccinating is stable; under a death-scare cost the only stable
outcome is saturated acceptance at the co-existence point, with the
family-specific parameter thresholds printed.  Then a birth-rate sweep
shows the verdict sequence and a direct mutant-invasion check.
"""

import numpy as np

from vaxgame import (
    CostParams,
    Family,
    ModelParams,
    classify_ess,
    mutation_stability,
)

PARAMS = ModelParams(lam=8.549, r=1.188, nu=0.904, b=0.322, d=0.1)
REFERENCE = CostParams(c_v1=2.88, c_v2=0.65, c_v2_bar=1.91, c_I1=4.32 / 1.188)
SCARE = CostParams(c_v1=2.88, c_v2=0.65, c_v2_bar=1.91, c_I1=40.0)


def main() -> None:
    for label, costs in [("reference costs", REFERENCE), ("death-scare costs", SCARE)]:
        print(f"\n=== {label} ===")
        for family in (Family.FC, Family.FR, Family.VFC1):
            verdict = classify_ess(family, PARAMS, costs)
            beta_star = (
                f", beta* > {verdict.beta_star_threshold:.4f}"
                if verdict.beta_star_threshold
                else ""
            )
            print(
                f"  {family.value:>5}: {verdict.kind.value:<22} at "
                f"({verdict.equilibrium[0]:.4f}, {verdict.equilibrium[1]:.4f}), "
                f"h = {verdict.h_value:+.3f}{beta_star}"
            )

    print("\n=== birth-rate sweep (lam=4, r=0.15, nu=0.5) ===")
    last = None
    for b in np.arange(0.2, 4.2001, 0.1):
        params = ModelParams(lam=4.0, r=0.15, nu=0.5, b=float(b), d=0.05)
        costs = CostParams(c_v1=2.88, c_v2=0.65, c_v2_bar=1.91, c_I1=4.32 / 0.15)
        verdict = classify_ess(Family.FC, params, costs)
        if verdict.kind is not last:
            print(f"  b = {b:4.2f}: {verdict.kind.value}")
            last = verdict.kind

    print("\n=== mutant invasion of the saturated incumbent ===")
    report = mutation_stability(Family.FC, beta_incumbent=2.5, params=PARAMS, costs=SCARE)
    print(f"  incumbent acceptance at equilibrium: {report.incumbent_q:g}")
    for probe in report.probes:
        print(
            f"  mutant p={probe.p:<4g} eps={probe.eps:<6g}: perturbed "
            f"({probe.theta:.5f}, {probe.psi:.5f}), h = {probe.h:+.3f}, "
            f"best response {probe.best_response.value} "
            f"{'(incumbent holds)' if probe.ok else '(INVADED)'}"
        )
    print(f"  verdict: {'stable' if report.passed else 'unstable'} against the grid")


if __name__ == "__main__":
    main()
