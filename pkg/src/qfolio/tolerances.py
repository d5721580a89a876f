"""Central numerical tolerance constants.

Kept in one place so the simulator, model, and tests agree on what counts
as equal.
"""

# Statevector norm drift allowed after applying a circuit.
NORM_ATOL = 1e-10

# Spin-model energy vs. binary quadratic cost, per bitstring.
ENERGY_EQUIV_ATOL = 1e-9

# Most negative eigenvalue tolerated in a sample covariance matrix.
PSD_EIG_FLOOR = -1e-9

# Feasible-bitstring objective identity check.
FEASIBLE_IDENTITY_ATOL = 1e-9
