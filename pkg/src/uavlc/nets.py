"""Small fully-connected networks with hand-written backpropagation.

tanh hidden layers, linear output. Gradients are exact and are validated
against central finite differences in the test suite; keep any change here
in sync with those checks.
"""

from __future__ import annotations

import numpy as np

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0


class Mlp:
    def __init__(self, sizes, rng: np.random.Generator):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = list(sizes)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            scale = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-scale, scale, (fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    # -- parameter plumbing --

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def set_params(self, params: list[np.ndarray]):
        it = iter(params)
        for i in range(len(self.weights)):
            self.weights[i] = next(it).copy()
            self.biases[i] = next(it).copy()

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, flat: np.ndarray):
        offset = 0
        new = []
        for p in self.params:
            new.append(flat[offset:offset + p.size].reshape(p.shape))
            offset += p.size
        self.set_params(new)

    def clone(self) -> "Mlp":
        other = Mlp.__new__(Mlp)
        other.sizes = list(self.sizes)
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        return other

    # -- forward / backward --

    def forward(self, x: np.ndarray):
        """Returns (output, cache). x has shape (batch, in_dim)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        acts = [x]
        n_layers = len(self.weights)
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = acts[-1] @ w + b
            acts.append(np.tanh(z) if i < n_layers - 1 else z)
        return acts[-1], acts

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def backward(self, cache, grad_out: np.ndarray):
        """Gradients of a scalar loss given d(loss)/d(output).

        Returns (param_grads aligned with .params, d(loss)/d(input)).
        """
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        delta = np.atleast_2d(grad_out)
        for i in reversed(range(len(self.weights))):
            a_in = cache[i]
            grads_w[i] = a_in.T @ delta
            grads_b[i] = delta.sum(axis=0)
            delta = delta @ self.weights[i].T
            if i > 0:
                delta = delta * (1.0 - cache[i] ** 2)
        out = []
        for gw, gb in zip(grads_w, grads_b):
            out.extend([gw, gb])
        return out, delta


class Adam:
    """Bias-corrected adaptive-moment update over a list of parameters."""

    def __init__(self, params_like, lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params_like]
        self.v = [np.zeros_like(p) for p in params_like]

    def step(self, params: list[np.ndarray],
             grads: list[np.ndarray]) -> list[np.ndarray]:
        if len(params) != len(grads):
            raise ValueError("params/grads length mismatch")
        self.t += 1
        out = []
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g
            m_hat = self.m[i] / bc1
            v_hat = self.v[i] / bc2
            out.append(p - self.lr * m_hat / (np.sqrt(v_hat) + self.eps))
        return out

    def state(self) -> dict:
        return {"t": self.t, "m": self.m, "v": self.v}

    def load_state(self, state: dict):
        self.t = int(state["t"])
        self.m = [np.array(a) for a in state["m"]]
        self.v = [np.array(a) for a in state["v"]]

    def clone(self) -> "Adam":
        other = Adam([np.zeros(0)], self.lr, self.beta1, self.beta2, self.eps)
        other.t = self.t
        other.m = [m.copy() for m in self.m]
        other.v = [v.copy() for v in self.v]
        return other


def soft_update(target: Mlp, online: Mlp, coefficient: float):
    """Polyak averaging: target <- (1 - c) target + c online."""
    if target.sizes != online.sizes:
        raise ValueError("network shape mismatch")
    for tw, ow in zip(target.weights, online.weights):
        tw *= (1.0 - coefficient)
        tw += coefficient * ow
    for tb, ob in zip(target.biases, online.biases):
        tb *= (1.0 - coefficient)
        tb += coefficient * ob


def squash_log_std(raw: np.ndarray) -> np.ndarray:
    """Smooth map of the raw log-std head into [LOG_STD_MIN, LOG_STD_MAX]."""
    return LOG_STD_MIN + 0.5 * (LOG_STD_MAX - LOG_STD_MIN) * (np.tanh(raw) + 1.0)


def squash_log_std_grad(raw: np.ndarray) -> np.ndarray:
    return 0.5 * (LOG_STD_MAX - LOG_STD_MIN) * (1.0 - np.tanh(raw) ** 2)
