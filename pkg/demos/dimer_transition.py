# # Gap closing in a dimerized array
#
# Splitting each cell into two emitters at distance d1 opens a gap at
# k = pi/d. The gap closes at d1 = d/2. There the dispersion near the edge is
# linear, and the subradiant rate scales as 1/N instead of 1/N^3.

# In[1]:

import math

from subrad.analysis import dimer_family, fit_power_law, scaling_sweep
from subrad.experiments import dimer_gap_point

PI = math.pi
k0d = 0.8 * PI

# ## Scaling on and off the critical point

# In[2]:

for d1 in (0.47, 0.50, 0.53):
    sweeps = scaling_sweep(dimer_family(k0d, d1), [50, 71, 100, 141, 200], jobs=4)
    alphas = {band: fit_power_law(s, window=(50, 200)).alpha for band, s in sweeps.items()}
    print(f"d1/d = {d1:.2f}: alpha upper = {alphas['upper']:.2f}, lower = {alphas['lower']:.2f}")

# ## The dip in gamma_min away from d1 = d/2
#
# At fixed N, moving off the critical point suppresses the smallest rate
# by orders of magnitude.

# In[3]:

for d1 in (0.44, 0.47, 0.50, 0.53, 0.56):
    _, n, gap, g, _, _ = dimer_gap_point(k0d, d1, 200)
    print(f"d1/d = {d1:.2f}  N_cells = {n}  gap = {gap:+.3e}  gamma_min = {g:.3e}")
