"""
Redundant bumps in a wide layer
===============================

With 20 hidden neurons the ring is over-covered, and some neurons end up with
nearly the same activation shape and orientation.  Pairs are flagged when the
cosine distance of their coefficients is below 0.05 and the angle between
their weight vectors is below 10 degrees, then merged by summing their
outgoing weights.

Run:  python3 demos/redundant_bumps.py
"""

import math

import numpy as np

from enn.data import problem, train_test_split
from enn.network import enn_spec, init_network
from enn.optim import LearningRates
from enn.prune import detect_redundant_bumps, layer_angle_distribution, merge_redundant_neurons
from enn.train import TrainConfig, evaluate_accuracy, train_classification

train, test = train_test_split(problem("P1"), 100_000, 20_000, seed=0)
net = init_network(enn_spec([20]), 2, seed=0, dct_bias=1.0)
train_classification(net, train, TrainConfig(epochs=10, rates=LearningRates(1e-3, 1e-3)))
acc = evaluate_accuracy(net, test)
print(f"M1=20 accuracy {acc:.4f}")

rep = detect_redundant_bumps(net)
for layer, m, m2, d, a in rep.pairs:
    print(f"  neurons {m:2d} and {m2:2d}: distance {d:.4f}, angle {math.degrees(a):5.2f} deg")

merged = merge_redundant_neurons(net, rep)
print(f"merged width {merged.layers[0].width}, accuracy {evaluate_accuracy(merged, test):.4f}")

counts, edges = layer_angle_distribution(net, 0, bins=12)
print("angle histogram (degrees):")
for lo, n in zip(np.degrees(edges[:-1]), counts):
    print(f"  {lo:5.1f}  {'#' * int(n)}")

# For contrast: a randomly initialised deep layer has angles piled up at 90 degrees.
deep = init_network(enn_spec([256] * 4), 2, seed=0)
counts, edges = layer_angle_distribution(deep, 2, bins=12)
print("random 256-wide layer, share of pairs within 15 deg of 90:",
      f"{counts[5:7].sum() / counts.sum():.2f}")
