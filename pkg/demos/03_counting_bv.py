# %% [markdown]
# # Approximate counting and Bernstein-Vazirani
#
# Counting uses qubit 1 as the control and qubit 2 as the one-bit search
# space. If exactly one of the two inputs is marked, the output is an equal
# superposition and all four lines appear.

# %%
from spectralqc import algorithms
from spectralqc.acquisition import acquire_1d
from spectralqc.prep import pops_prepare
from spectralqc.spins import load_molecule

fig4 = load_molecule("fig4")
for f in algorithms.CASES["count"]:
    run = algorithms.counting_program(f, fig4)
    spec = acquire_1d(pops_prepare(fig4), fig4, program=run.program)
    heights = {pk.label: round(pk.magnitude, 3) for pk in spec.peaks}
    print(f, "k =", algorithms.COUNTS[f], heights)

# %% [markdown]
# Bernstein-Vazirani finds a hidden string with one oracle call. The oracle
# factorises into z rotations on the qubits where the string has a 1. The
# 3-bit string needs the four-spin molecule.

# %%
fig8 = load_molecule("fig8")
for a in algorithms.CASES["bv3"]:
    run = algorithms.bv_program(a, fig8)
    spec = acquire_1d(pops_prepare(fig8), fig8, program=run.program)
    print(a, "->", [pk.label for pk in spec.peaks])
