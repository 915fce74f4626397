"""
Fitting an image, then pruning the activations
==============================================

Pixel coordinates are mapped to gray levels by a 2-64-64-1 DCT network and by
a ReLU network of about the same size, both trained with full-batch Adam
(1e-3 for weights, 1e-2 for activation coefficients).  The DCT network is then
pruned by coefficient energy without any retraining.

Run:  python3 demos/image_fitting.py        (a few minutes)
Outputs go to demos/out/image/.
"""

import os

from enn.data import dataset_to_image, image_to_dataset, load_pgm, save_pgm
from enn.network import baseline_spec, enn_spec, forward, init_network, param_count
from enn.prune import prune_coefficients, pruned_distribution, threshold_for_fraction
from enn.train import inr_config, train_inr

HERE = os.path.dirname(__file__)
OUT = os.path.join(HERE, "out", "image")
os.makedirs(OUT, exist_ok=True)
img = load_pgm(os.path.join(HERE, "..", "tests", "data", "cameraman64.pgm"))
data = image_to_dataset(img)

nets = {
    "enn": init_network(enn_spec([64, 64]), 2, seed=0),
    "relu": init_network(baseline_spec("relu", [70, 70]), 2, seed=0),
}
for name, net in nets.items():
    m = train_inr(net, img, inr_config(epochs=300, eval_every=50), log=lambda s, n=name: print(n, s))
    print(f"{name}: {param_count(net)} parameters, final MSE {m.final['mse']:.3e}")
    save_pgm(dataset_to_image(forward(net, data.inputs), img.height, img.width), os.path.join(OUT, f"{name}.pgm"))

# Prune the smallest-energy coefficients and watch the reconstruction error.
for frac in (0.1, 0.2, 0.3, 0.4):
    net = nets["enn"].copy()
    rep = prune_coefficients(net, threshold_for_fraction(net, frac), data)
    low = sum(v for (_, f), v in pruned_distribution(rep).items() if f == 1)
    print(f"pruned {rep.fraction:.0%} (rho={rep.threshold:.2e}): MSE {rep.mse_before:.3e} -> "
          f"{rep.mse_after:.3e} (x{rep.mse_factor:.2f}); lowest frequency pruned {low} times")
