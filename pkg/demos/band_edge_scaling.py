# # Subradiant decay at the band edge of a regular array
#
# A chain of N two-level emitters with spacing d has a band of collective
# modes. The darkest states sit at the band edge k = pi/d. Their decay rate
# scales as N^-(s+1), where s is the order of the leading term of omega(k)
# near the edge. Generic spacings have s = 2. At one special spacing, k0 d = k4,
# the quadratic term vanishes and s = 4.

# In[1]:

import math

from subrad.analysis import fit_power_law, regular_family, scaling_sweep
from subrad.dispersion import band_edge_expansion, find_k4

PI = math.pi

# ## The quartic spacing
#
# The quadratic coefficient a2(k0 d) changes sign at k4.

# In[2]:

k4 = find_k4()
print(f"k4 = {k4 / PI:.8f} pi/d")
for k0d in (0.3 * PI, 0.55 * PI, k4):
    e = band_edge_expansion(k0d)
    print(f"k0d = {k0d / PI:.4f} pi: s = {e.s}, a2 = {e.a2:+.3e}, a4 = {e.a4:+.3e}")

# ## Decay rate versus N
#
# Dense diagonalization for each N gives the smallest rate. The fitted
# exponent follows s + 1.

# In[3]:

N_list = [50, 71, 100, 141, 200, 283]
for k0d in (0.55 * PI, k4):
    series = scaling_sweep(regular_family(k0d), N_list, jobs=4)["global"]
    fit = fit_power_law(series, window=(50, 283))
    print(f"k0d = {k0d / PI:.4f} pi")
    for n, g in zip(series.N, series.gamma):
        print(f"   N = {n:4d}   gamma_min = {g:.4e}")
    print(f"   alpha = {fit.alpha:.3f} (expected {band_edge_expansion(k0d).s + 1}), r2 = {fit.r_squared:.5f}")
