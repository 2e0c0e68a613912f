"""Repeated one-shot equilibrium play on the cascading benchmark.

Two marketers campaign five times on a 50-node network. Between campaigns
opinions average along the graph. Watch the worst-case distance to the
market split eta = lambda2 / (lambda1 + lambda2) shrink campaign by campaign.
"""
from coopetition import StrategyProfile, contraction_trace, predict_equilibrium, run_profile
from coopetition.experiment import benchmark_preset, prepare

setup = prepare(benchmark_preset(50))
params = setup.params
print(f"eta = {params.eta:.4f}, budgets = ({params.budget1:.3f}, {params.budget2:.3f})")

prediction = predict_equilibrium(setup.rho_per_stage, params)
print(f"strongest node influence {prediction.rho_max:.3f} vs cost sum {params.lambda_sum}: {prediction.regime.value}")

history = run_profile(setup.x0, setup.laplacian, params, StrategyProfile.repeated_ne())
for rec, dev in zip(history.records, contraction_trace(history, params.eta)):
    print(f"campaign {rec.k} at t={rec.t:.0f}: max |x - eta| = {dev:.5f}, "
          f"spend ({rec.a1.sum():.3f}, {rec.a2.sum():.3f}), payoff ({rec.u1:.3f}, {rec.u2:.3f})")

# stretch the horizon to see how far the contraction goes
longer = prepare(benchmark_preset(50), n_stages=20)
trace = contraction_trace(run_profile(longer.x0, longer.laplacian, longer.params,
                                      StrategyProfile.repeated_ne()), params.eta)
print("after 20 campaigns:", f"{trace[-1]:.2e}")
