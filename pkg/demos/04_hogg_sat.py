# %% [markdown]
# # Hogg's SAT heuristic on three bits
#
# The phase operator marks each assignment with a factor i^c, where c is the
# number of violated clauses. The mixing operator depends only on Hamming
# distance. For a single clause, half of the assignments survive. With three
# clauses there is one satisfying assignment, and after one step it holds all
# of the amplitude.

# %%
import numpy as np

from spectralqc import algorithms
from spectralqc.acquisition import acquire_1d
from spectralqc.compiler import parse_formula
from spectralqc.prep import pops_prepare
from spectralqc.spins import label, load_molecule

sys = load_molecule("fig8")
for formula in ("V1", "~V3", "V3&~V2&V1"):
    state = algorithms.hogg_state(parse_formula(formula))
    support = [label(i, 3) for i in np.flatnonzero(np.abs(state) > 1e-9)]
    run = algorithms.hogg_program(formula, sys)
    spec = acquire_1d(pops_prepare(sys), sys, program=run.program)
    print(f"{formula:12s} gate level {support}  spectrum {[pk.label for pk in spec.peaks]}")

# %% [markdown]
# The even-m branch exists only at the gate level. Two clauses leave two
# candidate assignments.

# %%
state = algorithms.hogg_state(parse_formula("V2&V1"))
print({label(i, 3): round(float(abs(a) ** 2), 3) for i, a in enumerate(state) if abs(a) > 1e-9})
