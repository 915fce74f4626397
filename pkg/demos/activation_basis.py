"""
The odd-frequency cosine basis behind each activation
=====================================================

Every neuron's activation is a short series of odd-frequency cosines on the
grid [0, N].  The columns are orthogonal, which makes two things cheap:
projecting a target shape onto the series, and predicting what pruning a
coefficient costs.

Run:  python3 demos/activation_basis.py
"""

import numpy as np

from enn.activation import DctActivation, basis_matrix, project_function, sigmoid_ramp

N, Q = 512, 6
B = basis_matrix(Q, N)

# Orthogonality: B^T B is N/2 times the identity.
gram = B.T @ B
print("max |B'B - N/2 I| =", np.abs(gram - N / 2 * np.eye(Q)).max())

# Projecting the tanh ramp used to initialise every neuron.
ramp = sigmoid_ramp(N)
F = project_function(ramp, Q, N)
print("ramp coefficients:", np.round(F, 4))
for k in range(1, Q + 1):
    approx = B[:, :k] @ F[:k]
    print(f"  first {k} terms: rms error {np.sqrt(np.mean((approx - ramp) ** 2)):.4f}")

# Pruning coefficient q removes exactly F_q * (column q): the mean squared
# change on the grid is F_q^2 / 2, independent of the other coefficients.
act = DctActivation(F.copy(), N)
grid = np.arange(1, N + 1)
full = act.value(grid)
for q in range(Q):
    mask = np.ones(Q, bool)
    mask[q] = False
    pruned = DctActivation(F.copy(), N, mask).value(grid)
    print(f"  drop q={q + 1}: measured {np.mean((full - pruned) ** 2):.3e}, predicted {F[q] ** 2 / 2:.3e}")

# Outside [0, N] the series just repeats with period 2N; nothing is clipped.
print("sigma(100) vs sigma(100 + 2N):", act.value(100.0), act.value(100.0 + 2 * N))
