"""Information-theoretic generalization bounds for deep networks.

Contraction coefficients of regularized layers, closed-form bounds built on
them, a Gaussian-mixture case study with Monte-Carlo verification, and an
experiment CLI.
"""

from .bounds import (
    Comparison,
    DiscreteLatentSpec,
    FiniteParamSpec,
    GibbsSpec,
    MiubInputs,
    MutualInfoInputs,
    contraction_bound,
    discrete_latent_bound,
    finite_param_mi_ub,
    gibbs_bound,
    gibbs_bound_worst_case,
    kl_vs_wasserstein_flag,
    miub_dropout,
)
from .channels import FiniteChannel, eta_kl_bruteforce, hellinger_eta_lower_bound, tv_shifted_gaussians
from .numerics import WeightStack, frobenius_norm, make_rng, numerical_rank, operator_norm, q_function, weight_products
from .sdpi import (
    DropConnect,
    Dropout,
    GaussianNoise,
    NetworkSpec,
    dropconnect_eta_ub,
    dropout_eta,
    eta_product_approx,
    network_eta_product,
    noise_eta_ub,
)

__version__ = "0.1.0"
