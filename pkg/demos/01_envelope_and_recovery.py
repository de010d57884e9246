"""
Envelope, national recoveries and life expectancy
=================================================

The envelope ``a(t)`` is a logistic in calendar time. A nation that restarts
after a disaster grows exponentially at rate ``beta`` and merges into it.
"""

import numpy as np

from indevo import ModelConstants, RecoveryParams, evolution_level, gdp_recovery, life_expectancy

c = ModelConstants()

# The envelope passes half its amplitude at T_a.
print("a(T_a) =", evolution_level(c.T_a, c), "=", c.a_bar / 2)

# Three recoveries from the same disaster year with different initial rates.
years = np.arange(1950, 2101, 25)
print("\nyear      a(t)   " + "   ".join(f"beta={b:.2f}" for b in (0.05, 0.08, 0.12)))
for t in years:
    row = [gdp_recovery(t, c, RecoveryParams(b, 1950.0)) for b in (0.05, 0.08, 0.12)]
    print(f"{t}  {evolution_level(t, c):8.0f}  " + "  ".join(f"{v:9.0f}" for v in row))

# Faster recoveries merge sooner. The gap to the envelope shrinks like exp(-beta t).

# Life expectancy reaches its midpoint L_bar/2 years ahead of the envelope.
print("\nlife expectancy halftime", c.life_halftime, "value", life_expectancy(c.life_halftime, c))
