"""
Gradient-descent optimisers working on dictionaries of numpy arrays
"""

import numpy as np


class SGD:
    """Plain stochastic gradient descent: p ← p − α·g."""

    def __init__(self, lr=0.5):
        self.lr = lr

    def step(self, params, grads):
        for key in params:
            params[key] -= self.lr * grads[key]


class Adam:
    """
    Adam (adaptive moment estimation).

    Args:
        lr (float): Step size α
        beta1 (float): Decay of the first-moment estimate
        beta2 (float): Decay of the second-moment estimate
        epsilon (float): Added to the denominator
    """

    def __init__(self, lr=0.5, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m = {}
        self.v = {}
        self.t = 0

    def step(self, params, grads):
        """Update ``params`` in place from ``grads`` (same keys)."""
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        step_size = self.lr / bc1

        for key in params:
            g = grads[key]
            if key not in self.m:
                self.m[key] = np.zeros_like(params[key])
                self.v[key] = np.zeros_like(params[key])

            self.m[key] *= self.beta1
            self.m[key] += (1.0 - self.beta1) * g
            self.v[key] *= self.beta2
            self.v[key] += (1.0 - self.beta2) * (g * g)

            denom = np.sqrt(self.v[key] / bc2) + self.epsilon
            params[key] -= step_size * self.m[key] / denom


def make_optimizer(name, lr, beta1=0.9, beta2=0.999, epsilon=1e-8):
    """Build an optimiser from its name ("adam" or "sgd")."""
    key = name.lower()
    if key == "adam":
        return Adam(lr, beta1, beta2, epsilon)
    if key == "sgd":
        return SGD(lr)
    raise ValueError(f"unknown optimizer {name!r}; choose 'adam' or 'sgd'")
