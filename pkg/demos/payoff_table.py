"""Stage payoffs after practical convergence, for three network sizes.

Repeated equilibrium play runs until every opinion is within 0.01 of eta.
The equilibrium row is that campaign's payoff; the proposed row is the
payoff of the next campaign if both marketers stop right there.
"""
from coopetition.experiment import format_table1, benchmark_preset, table1_row

rows = [table1_row(benchmark_preset(), n) for n in (50, 100, 200)]
print(format_table1(rows))
