# # Emitters coupled to a waveguide
#
# In an ideal 1D waveguide the coupling is -(i/2) exp(i k0 |x - x'|). The
# inverse of this matrix is an SSH chain with hoppings 1/sin(k0 d1) and
# 1/sin(k0 d2). The gap at k = 0 closes when sin(k0 d1) = -sin(k0 d2).

# In[1]:

import math

import numpy as np

from subrad.analysis import scaling_sweep, waveguide_family
from subrad.waveguide import (
    WaveguideDimerSpec,
    build_h1d,
    classify_critical,
    critical_decay_closed_form,
    critical_decay_quantized,
    dispersion_pm,
    ssh_matrix,
)

PI = math.pi
spec = WaveguideDimerSpec(8, PI / 3, PI / 3 + PI)

# ## The SSH structure of the inverse

# In[2]:

err = np.abs(np.linalg.inv(build_h1d(spec).matrix) - ssh_matrix(spec)).max()
print("critical family:", classify_critical(spec).value)
print(f"max |inv(H) - H_SSH| = {err:.2e}")
for k in (0.05, 0.5, 1.0):
    b = dispersion_pm(k, spec)
    print(f"k = {k:.2f}: omega+ = {b.omega_plus:+.4f}, omega- = {b.omega_minus:+.4f}, gap = {b.gap:.4f}")

# ## 1/N decay at criticality
#
# gamma * N is constant across N. The published closed form predicts a
# value about six times smaller than the numerics. The rate that follows
# from the complex wavenumbers of the finite chain agrees with them.

# In[3]:

sweeps = scaling_sweep(waveguide_family(spec.k0d1, spec.k0d2), [50, 100, 200], jobs=4)
for band, s in sweeps.items():
    print(band, "gamma*N:", np.round(s.gamma * s.N, 3))
print(f"closed form gamma*N = {critical_decay_closed_form(spec, 100).gamma_plus * 100:.3f}")
print(f"quantized   gamma*N = {critical_decay_quantized(spec, 100).gamma_plus * 100:.3f}")
