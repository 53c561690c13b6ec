# %% [markdown]
# # Reading a register from one spin's multiplet
#
# The fluorine observer couples to both protons, so its spectrum splits into
# four lines, one per proton basis state. Whatever population sits in a work
# state shows up as intensity on that state's line.

# %%
import numpy as np

from spectralqc.acquisition import acquire_1d
from spectralqc.prep import equilibrium, pops_prepare
from spectralqc.spins import load_molecule, transition_table

sys = load_molecule("fig4")
table = transition_table(sys)
for lab, f in table.entries:
    print(f"line {lab}: {f:+.3f} Hz")

# %% [markdown]
# At thermal equilibrium every work state is equally populated, so all four
# lines have the same height.

# %%
spec = acquire_1d(equilibrium(sys), sys)
for pk in spec.peaks:
    print(f"{pk.label}  {pk.freqs[0]:+.3f} Hz  height {pk.magnitude:.3f}")

# %% [markdown]
# POPS takes the equilibrium experiment and subtracts a second one in which a
# selective pi pulse has inverted the |000> <-> |100> transition. Only the
# |00> line survives the subtraction.

# %%
pops = pops_prepare(sys)
print(np.round(np.diagonal(pops.rho).real, 3))
spec = acquire_1d(pops, sys)
print([pk.label for pk in spec.peaks])
