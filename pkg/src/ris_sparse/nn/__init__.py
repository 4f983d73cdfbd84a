from .adam import Adam, AdamConfig, adam_step
from .gradcheck import grad_check, grad_check_params
from .layers import (Conv2D, Dense, Dropout, Flatten, Layer, LeakyReLU, ReLU,
                     Softmax, glorot_uniform)
from .network import (Network, Residual, layer_from_spec, load_checkpoint,
                      network_from_spec, save_checkpoint)

__all__ = [
    "Adam", "AdamConfig", "adam_step",
    "grad_check", "grad_check_params",
    "Conv2D", "Dense", "Dropout", "Flatten", "Layer", "LeakyReLU", "ReLU",
    "Softmax", "glorot_uniform",
    "Network", "Residual", "layer_from_spec", "load_checkpoint",
    "network_from_spec", "save_checkpoint",
]
