# # Carleman's operator
#
# The kernel 1/(x + y) has continuous spectrum [0, pi] and no eigenvalues. A
# truncated Nystrom matrix cannot see this directly, but its eigenvalues fill
# the interval more densely as the node count grows.

# %%
import numpy as np

from hankelsq.verify import carleman_spectra, verify_identity

rep = verify_identity("CARLEMAN_2_11")
print("W = Gamma^2 residual:", rep.max_rel_residual)

# %%
spec = carleman_spectra(nodes=(50, 100, 200))
for row in spec.details["runs"]:
    print(row["nodes"], row["gamma_max"], row["W_max"], row["gamma_hist"])

# %% [markdown]
# The largest Gamma eigenvalue creeps towards pi slowly, and W_max stays
# below pi^2. This is typical of a continuous spectrum seen through a finite
# window.

# %%
print(np.pi, np.pi**2, spec.details["largest_gamma_nondecreasing"])
