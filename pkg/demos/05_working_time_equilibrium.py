"""
Working time in equilibrium
===========================

Working time amplified by production capital must match spare time
amplified by human capacity. The result is a harmonic law for output and a
floor on working time once capital saturates.
"""

from indevo import education_stock, equilibrium_output, working_time
from indevo.equilibrium import to_hours_per_week

a_bar = 75000.0
k_w, h_s = 4.0 * a_bar, 1.3 * a_bar

w = working_time(k_w, h_s)
print("working time %.3f of eps_bar = %.1f h/week" % (w, to_hours_per_week(w)))
print("output %.4f a_bar" % (equilibrium_output(k_w, h_s) / a_bar))

# More capital per unit of human capacity pushes working time down.
for ratio in (1.0, 2.0, 4.0, 8.0):
    print(f"k_w/h_s = {ratio:3.0f}: {to_hours_per_week(working_time(ratio, 1.0)):5.1f} h/week")

# Education spending of 6% of GDP sustains a capacity well above what is needed.
print("educated capacity %.2f a_bar" % (education_stock(0.06, 62.0, a_bar) / a_bar))
