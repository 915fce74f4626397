"""
Learning a ring with six adaptive neurons
=========================================

A 2-6-1 network with DCT activations is trained on the annulus problem:
points in [-1, 1]^2 are labelled +1 inside the ring 0.35 < r < 0.75.
Afterwards each hidden neuron's activation curve and its "bump" (its
response over the whole input square) are written out for inspection.

Run from the repository root:  python3 demos/ring_classification.py
Outputs go to demos/out/ring/.
"""

import os

import numpy as np

from enn.data import ImageGrid, problem, ring_positive_fraction, save_pgm, train_test_split
from enn.network import activation_curve, bump_raster, decision_map, enn_spec, init_network, param_count
from enn.optim import LearningRates
from enn.train import TrainConfig, evaluate_accuracy, train_classification

OUT = os.path.join(os.path.dirname(__file__), "out", "ring")
os.makedirs(OUT, exist_ok=True)

# Fewer samples and epochs than the full experiment (400k, 50) so the demo
# finishes in about a minute; accuracy is a little lower as a result.
train, test = train_test_split(problem("P1"), 100_000, 20_000, seed=0)
print(f"positive share {np.mean(train.targets == 1):.3f}, annulus area share {ring_positive_fraction():.3f}")

# Hidden biases start at 1 so the odd cosine basis can form two-sided bumps.
net = init_network(enn_spec([6], Q=6, N=512), 2, seed=0, dct_bias=1.0)
print(net, "-", param_count(net), "trainable parameters")

cfg = TrainConfig(epochs=10, batch_size=64, rates=LearningRates(1e-3, 1e-3), seed=0)
train_classification(net, train, cfg, eval_data=test, log=print)
print(f"held-out accuracy {evaluate_accuracy(net, test):.4f}")

# The decision map is the sign of the output over a 128x128 lattice.
save_pgm(ImageGrid(decision_map(net, 128).astype(float)), os.path.join(OUT, "decision_map.pgm"))

# Each hidden neuron: activation shape against z in [-1, 1] and its bump.
for m in range(6):
    z, s = activation_curve(net, 0, m, n=9)
    print(f"neuron {m}: sigma(z) at z = -1..1:", np.array2string(s, precision=2, suppress_small=True))
    bump = bump_raster(net, 0, m, 128)
    lo, hi = bump.min(), bump.max()
    save_pgm(ImageGrid(2 * (bump - lo) / (hi - lo + 1e-12) - 1), os.path.join(OUT, f"bump_{m}.pgm"))
print("rasters written to", OUT)
