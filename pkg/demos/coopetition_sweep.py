"""When does stopping early pay off for both marketers?

Each coopetition profile plays the equilibrium for K1 campaigns and then
both sides go silent. Compare mean payoffs against equilibrium play
throughout, and ask the sufficient certificate whether it agrees.
"""
from coopetition import (
    StrategyProfile,
    check_sustainability,
    long_term_utility,
    run_profile,
    sustainability_certificate,
)
from coopetition.experiment import benchmark_preset, prepare

for n_stages in (5, 8):
    setup = prepare(benchmark_preset(50), n_stages=n_stages)
    ne = run_profile(setup.x0, setup.laplacian, setup.params, StrategyProfile.repeated_ne())
    base = long_term_utility(ne)
    print(f"\nK = {n_stages}: equilibrium payoffs ({base[0]:.3f}, {base[1]:.3f})")
    for k1 in range(n_stages):
        cs = run_profile(setup.x0, setup.laplacian, setup.params, StrategyProfile.coopetition(k1))
        verdict = check_sustainability(cs, ne)
        cert = sustainability_certificate(ne, k1)
        print(f"  K1={k1}: ({verdict.utilities[0]:.3f}, {verdict.utilities[1]:.3f}) "
              f"sustainable={verdict.sustainable!s:5} certificate={cert.passed!s:5} delta={cert.delta:.4f}")
