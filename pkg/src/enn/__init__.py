"""Expressive neural networks: MLPs with trainable truncated-DCT activations."""

from .activation import DctActivation, basis_matrix, project_function
from .data import Dataset, ImageGrid, generate_problem, load_pgm, problem, save_pgm
from .modelio import inspect_model, load_model, save_model
from .network import (LayerSpec, Network, backward, baseline_spec, enn_spec, forward,
                      init_network, param_count)
from .optim import LearningRates, adam_step, sgd_step
from .prune import detect_redundant_bumps, prune_coefficients, threshold_for_fraction
from .train import TrainConfig, evaluate_accuracy, evaluate_mse, train_classification, train_inr

__version__ = "0.1.0"
