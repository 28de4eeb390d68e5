"""Registry of bounded smooth path functionals.

These are the test functionals fed to the filter and to the variational
solvers.  Every entry is smooth along paths (safe for gradient-based
optimization) and carries declared bounds [lower, upper] that hold
pointwise, including in floating point.  Clamps are smoothed with
soft-min/soft-max at temperature ``tau`` (default 1e-2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

LN2 = float(np.log(2.0))
DEFAULT_TAU = 1e-2


def _sigmoid(z):
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def soft_max(x, floor, tau):
    """Smooth max(x, floor); result >= max(x, floor) >= floor, also in FP."""
    x = np.asarray(x, dtype=np.float64)
    return np.maximum(x, floor) + tau * np.log1p(np.exp(-np.abs(x - floor) / tau))


def soft_min(x, ceil, tau):
    """Smooth min(x, ceil); result <= min(x, ceil) <= ceil, also in FP."""
    x = np.asarray(x, dtype=np.float64)
    return np.minimum(x, ceil) - tau * np.log1p(np.exp(-np.abs(x - ceil) / tau))


def soft_clamp(x, lo, hi, tau):
    """Smooth clamp of x into [lo - tau*ln2, hi]."""
    return soft_min(soft_max(x, lo, tau), hi, tau)


def _soft_clamp_deriv(x, lo, hi, tau):
    x = np.asarray(x, dtype=np.float64)
    y = soft_max(x, lo, tau)
    return _sigmoid((hi - y) / tau) * _sigmoid((x - lo) / tau)


@dataclass
class PathFunctional:
    """A bounded smooth functional of a grid-sampled path.

    ``fn`` maps node values of shape (..., n_steps+1, d) to scalars of
    shape (...).  ``grad_fn`` maps a single path (n_steps+1, d) to the
    gradient with respect to every node; when absent, a central
    finite-difference fallback is used.
    """

    name: str
    lower: float
    upper: float
    fn: Callable[[np.ndarray], np.ndarray]
    grad_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    params: dict = field(default_factory=dict)

    def __call__(self, values: np.ndarray) -> np.ndarray:
        return self.fn(np.asarray(values, dtype=np.float64))

    def grad(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if self.grad_fn is not None:
            return self.grad_fn(values)
        step = 1e-6
        g = np.zeros_like(values)
        for idx in np.ndindex(values.shape):
            bumped = values.copy()
            bumped[idx] += step
            up = float(self.fn(bumped))
            bumped[idx] -= 2 * step
            dn = float(self.fn(bumped))
            g[idx] = (up - dn) / (2 * step)
        return g


def make_const(c: float = 0.0) -> PathFunctional:
    c = float(c)

    def fn(values):
        return np.full(values.shape[:-2], c)

    def grad_fn(values):
        return np.zeros_like(values)

    return PathFunctional("const", c, c, fn, grad_fn, params={"c": c})


def make_zero() -> PathFunctional:
    f = make_const(0.0)
    f.name = "zero"
    return f


def make_terminal_clamp(lo: float = -1.0, hi: float = 1.0, tau: float = DEFAULT_TAU,
                        weight=None, coord: int = 0, scale: float = 1.0) -> PathFunctional:
    """Smoothed clamp of a linear read-out of the terminal state.

    f = scale * soft_clamp(<w, x(T)>, lo, hi).  Bounds scale*[lo - tau*ln2, hi].
    """
    lo, hi, tau, scale = float(lo), float(hi), float(tau), float(scale)
    if not lo < hi:
        raise ValueError("need lo < hi")
    if scale <= 0:
        raise ValueError("scale must be positive")

    def readout(values):
        if weight is not None:
            return values[..., -1, :] @ np.asarray(weight, dtype=np.float64)
        return values[..., -1, coord]

    def fn(values):
        return scale * soft_clamp(readout(values), lo, hi, tau)

    def grad_fn(values):
        g = np.zeros_like(values)
        x = readout(values)
        d = scale * _soft_clamp_deriv(x, lo, hi, tau)
        if weight is not None:
            g[-1, :] = d * np.asarray(weight, dtype=np.float64)
        else:
            g[-1, coord] = d
        return g

    return PathFunctional(
        "terminal_clamp", scale * (lo - tau * LN2), scale * hi, fn, grad_fn,
        params={"lo": lo, "hi": hi, "tau": tau, "coord": coord, "scale": scale},
    )


def make_quadratic_clamp(q: float = 1.0, target: float = 0.0, bound: float = 50.0,
                         tau: float = DEFAULT_TAU, coord: int = 0) -> PathFunctional:
    """Soft-min of a quadratic terminal cost against a ceiling.

    f = soft_min(q * (x(T)[coord] - target)^2, bound).  For values well
    below the ceiling this is the plain quadratic to within tau*exp(-gap/tau).
    """
    q, target, bound, tau = float(q), float(target), float(bound), float(tau)
    if q < 0 or bound <= 0:
        raise ValueError("need q >= 0 and bound > 0")

    def fn(values):
        v = q * (values[..., -1, coord] - target) ** 2
        return soft_min(v, bound, tau)

    def grad_fn(values):
        g = np.zeros_like(values)
        x = values[-1, coord]
        v = q * (x - target) ** 2
        g[-1, coord] = _sigmoid((bound - v) / tau) * 2.0 * q * (x - target)
        return g

    return PathFunctional(
        "quadratic_clamp", -tau * LN2, bound, fn, grad_fn,
        params={"q": q, "target": target, "bound": bound, "tau": tau, "coord": coord},
    )


def make_supnorm_clamp(lo: float = -1.0, hi: float = 1.0, tau: float = DEFAULT_TAU,
                       coord: int = 0, smooth_T: float = 0.05) -> PathFunctional:
    """Smoothed clamp of a soft running maximum of one coordinate.

    The running max over grid nodes is smoothed by log-sum-exp at
    temperature smooth_T, then clamped into [lo, hi].
    """
    lo, hi, tau, smooth_T = float(lo), float(hi), float(tau), float(smooth_T)
    if not lo < hi:
        raise ValueError("need lo < hi")

    def softmax_nodes(values):
        g = values[..., :, coord] / smooth_T
        m = np.max(g, axis=-1, keepdims=True)
        return smooth_T * (np.log(np.sum(np.exp(g - m), axis=-1)) + m[..., 0])

    def fn(values):
        return soft_clamp(softmax_nodes(values), lo, hi, tau)

    def grad_fn(values):
        g = np.zeros_like(values)
        z = values[:, coord] / smooth_T
        m = np.max(z)
        w = np.exp(z - m)
        w /= w.sum()
        sm = smooth_T * (np.log(np.sum(np.exp(z - m))) + m)
        g[:, coord] = _soft_clamp_deriv(np.asarray(sm), lo, hi, tau) * w
        return g

    return PathFunctional(
        "supnorm_clamp", lo - tau * LN2, hi, fn, grad_fn,
        params={"lo": lo, "hi": hi, "tau": tau, "coord": coord, "smooth_T": smooth_T},
    )


def make_bump(amplitude: float = 1.0, center: float = 0.0, width: float = 1.0,
              coord: int = 0) -> PathFunctional:
    """Gaussian bump of the terminal state: amplitude * exp(-(x-c)^2 / 2w^2)."""
    amplitude, center, width = float(amplitude), float(center), float(width)
    if amplitude <= 0 or width <= 0:
        raise ValueError("need amplitude > 0 and width > 0")

    def fn(values):
        z = (values[..., -1, coord] - center) / width
        return amplitude * np.exp(-0.5 * z ** 2)

    def grad_fn(values):
        g = np.zeros_like(values)
        z = (values[-1, coord] - center) / width
        g[-1, coord] = amplitude * np.exp(-0.5 * z ** 2) * (-z / width)
        return g

    return PathFunctional(
        "bump", 0.0, amplitude, fn, grad_fn,
        params={"amplitude": amplitude, "center": center, "width": width, "coord": coord},
    )


_REGISTRY = {
    "zero": make_zero,
    "const": make_const,
    "terminal_clamp": make_terminal_clamp,
    "quadratic_clamp": make_quadratic_clamp,
    "supnorm_clamp": make_supnorm_clamp,
    "bump": make_bump,
}


def functional_names():
    return sorted(_REGISTRY)


def build_functional(name: str, params: Optional[dict] = None) -> PathFunctional:
    if name not in _REGISTRY:
        raise ValueError(f"unknown functional {name!r}; registry: {functional_names()}")
    return _REGISTRY[name](**(params or {}))
