"""A single campaign on a single consumer.

Sweep the consumer's opinion and show who spends. In the low-influence
case nobody spends inside a middle band. In the high-influence case both
spend inside the band and push the opinion exactly to eta.
"""
import numpy as np

from coopetition import GameParameters, budget_threshold, jump, node_regime, one_shot_ne

for rho in (1.2, 4.0):
    probe = GameParameters(1.0, 0.5, 1.0, 1.0)
    t1, t2 = budget_threshold([rho], probe)
    params = GameParameters(1.0, 0.5, max(1.1 * t1, 1.0), max(1.1 * t2, 1.0))
    reg = node_regime(rho, params)
    print(f"\nrho = {rho}: {reg.regime.value} regime, band ({reg.lower:.3f}, {reg.upper:.3f})")
    for x in np.linspace(0.05, 0.95, 10):
        a1, a2 = one_shot_ne([x], [rho], params)
        after = jump([x], a1, a2)[0]
        print(f"  x={x:.2f}  a1={a1[0]:.4f}  a2={a2[0]:.4f}  x+={after:.4f}")
