# # Tail integrals of Hermite functions
#
# With phi_n = He_n(x) exp(-x^2/4) / sqrt(n! sqrt(2 pi)), the tail integral of
# phi_m phi_n over [s, oo) is a Wronskian divided by (m - n). The ladder
# relations bring in sqrt(k + 1) weights, so an unweighted Wronskian is not
# proportional to the integral. The ratios below make this visible.

# %%
from hankelsq.verify import hermite_ratios, hermite_wronskian_residual

for m, n in ((1, 0), (2, 0), (2, 1)):
    ratios = [r for _, _, _, r in hermite_ratios(m, n, (0.0, 0.5, 1.0))]
    print((m, n), [round(r, 4) for r in ratios])

# %% [markdown]
# The weighted form
#
#   (sqrt(n+1) phi_m phi_{n+1} - sqrt(m+1) phi_{m+1} phi_n)(s) / (m - n)
#
# matches the quadrature to rounding.

# %%
for m, n in ((1, 0), (2, 0), (2, 1), (5, 3)):
    print((m, n), hermite_wronskian_residual(m, n, (0.0, 0.5, 1.0, 2.0)))
