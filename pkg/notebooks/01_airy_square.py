# # The Airy kernel as the square of a Hankel operator
#
# W(x, y) = (Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y) on the half line is
# Gamma^2, where Gamma has the additive kernel Ai(x + y). We check this pointwise
# and then through the spectrum of Nystrom discretisations.

# %%
import numpy as np

from hankelsq import make_kernel, sym_eigs, verify_identity
from hankelsq.hankelop import nystrom_kernel, nystrom_rule, nystrom_symbol

k = make_kernel("airy:s=0")
print(k.flavor, k.decay)

# %% [markdown]
# Pointwise: the factorisation residual on the default grid.

# %%
rep = verify_identity("AIRY_FACT")
print(rep.max_rel_residual, rep.tolerance, rep.passed)

# %% [markdown]
# Spectrally: eigenvalues of W against squared eigenvalues of Gamma. Gamma has
# negative eigenvalues too, so the squares are re-sorted before comparing.

# %%
for n in (40, 80, 120):
    rule = nystrom_rule(k, n)
    w = sym_eigs(nystrom_kernel(k, rule)).eigenvalues[:5]
    g2 = np.sort(sym_eigs(nystrom_symbol(k.symbol, rule)).eigenvalues ** 2)[::-1][:5]
    print(n, np.max(np.abs(w - g2)) / w[0])

# %%
print(w)
