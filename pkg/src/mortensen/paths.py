"""Time grids, sampled paths, and the two integrators.

The signal/observation pair is simulated by Euler-Maruyama with the
observation integral accumulated by left-endpoint Riemann sums (the Ito
convention).  Deterministic controlled flows are integrated by classical
RK4 with the control held constant on each step; action values are later
compared at the 1e-3 level, which plain Euler would not support.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, NonFiniteState
from .models import ModelSpec
from .rng import stream
from .util import fmt_float


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0, T] with n_steps intervals."""

    n_steps: int
    horizon_T: float

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if not (np.isfinite(self.horizon_T) and self.horizon_T > 0):
            raise ValueError("horizon_T must be positive")

    @property
    def dt(self) -> float:
        return self.horizon_T / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon_T, self.n_steps + 1)


def _require_same_grid(*grids):
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridMismatch(f"grids differ: {first} vs {g}")
    return first


@dataclass(frozen=True)
class Path:
    """Trajectory sampled at grid nodes: values has shape (n_steps+1, dim)."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[0] != self.grid.n_steps + 1:
            raise ValueError(f"path values must be (n_steps+1, dim), got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("path contains non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def terminal(self) -> np.ndarray:
        return self.values[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ",".join(f"x{j+1}" for j in range(self.dim))
        buf.write(f"t,{cols}\n")
        for t, row in zip(self.grid.times, self.values):
            buf.write(fmt_float(t) + "," + ",".join(fmt_float(v) for v in row) + "\n")
        return buf.getvalue()


def path_from_csv(text: str) -> Path:
    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    data = np.array([[float(v) for v in row] for row in rows])
    times, values = data[:, 0], data[:, 1:]
    n = len(times) - 1
    return Path(TimeGrid(n, float(times[-1])), values)


@dataclass(frozen=True)
class ControlPath:
    """Piecewise-constant control: values[i] acts on [t_i, t_{i+1})."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[0] != self.grid.n_steps:
            raise ValueError(f"control values must be (n_steps, dim), got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("control contains non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def l2_sq(self) -> float:
        """Squared L2 norm: sum_i ||values[i]||^2 * dt."""
        return float(np.sum(self.values ** 2) * self.grid.dt)


def zero_control(grid: TimeGrid, dim: int) -> ControlPath:
    return ControlPath(grid, np.zeros((grid.n_steps, dim)))


def constant_control(grid: TimeGrid, vector) -> ControlPath:
    vec = np.atleast_1d(np.asarray(vector, dtype=np.float64))
    return ControlPath(grid, np.tile(vec, (grid.n_steps, 1)))


@dataclass(frozen=True)
class NoiseDraw:
    """Brownian increments for one simulation: variance dt per coordinate."""

    grid: TimeGrid
    increments_W: np.ndarray  # (n_steps, k)
    increments_B: np.ndarray  # (n_steps, m)
    seed: int


def draw_noise(model: ModelSpec, grid: TimeGrid, seed: int) -> NoiseDraw:
    rng = stream(seed)
    scale = np.sqrt(grid.dt)
    dW = scale * rng.standard_normal((grid.n_steps, model.dim_k))
    dB = scale * rng.standard_normal((grid.n_steps, model.dim_m))
    return NoiseDraw(grid, dW, dB, seed)


def _check_finite(x, step):
    if not np.all(np.isfinite(x)):
        raise NonFiniteState(step)


def _sigma_mul(model, x, u):
    """sigma(x) @ u with batch broadcasting."""
    return np.einsum("...dk,...k->...d", model.sigma(x), u)


def integrate_flow_values(model: ModelSpec, control_values: np.ndarray,
                          grid: TimeGrid) -> np.ndarray:
    """RK4 integration of dx/dt = b(x) + sigma(x) u(t), batched.

    control_values has shape (..., n_steps, k); the result has shape
    (..., n_steps+1, d).  The control is constant within each step.
    """
    control_values = np.asarray(control_values, dtype=np.float64)
    dt = grid.dt
    batch = control_values.shape[:-2]
    x = np.broadcast_to(model.x0, batch + (model.dim_d,)).copy()
    out = np.empty(batch + (grid.n_steps + 1, model.dim_d))
    out[..., 0, :] = x

    def f(xx, uu):
        return model.b(xx) + _sigma_mul(model, xx, uu)

    for i in range(grid.n_steps):
        u = control_values[..., i, :]
        k1 = f(x, u)
        k2 = f(x + 0.5 * dt * k1, u)
        k3 = f(x + 0.5 * dt * k2, u)
        k4 = f(x + dt * k3, u)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_finite(x, i)
        out[..., i + 1, :] = x
    return out


def integrate_flow(model: ModelSpec, control: ControlPath, grid: TimeGrid) -> Path:
    """Deterministic controlled flow through the drift/diffusion fields."""
    _require_same_grid(control.grid, grid)
    if control.dim != model.dim_k:
        raise ValueError(f"control dim {control.dim} != model k {model.dim_k}")
    values = integrate_flow_values(model, control.values, grid)
    return Path(grid, values)


def simulate_signal_values(model: ModelSpec, eps: float, grid: TimeGrid,
                           increments_W: np.ndarray,
                           tilt_values: np.ndarray | None = None) -> np.ndarray:
    """Euler-Maruyama signal paths, batched over leading axes of increments.

    increments_W has shape (..., n_steps, k).  When tilt_values (n_steps, k)
    is given, the drift gains sigma(x) u(t); the corresponding likelihood
    correction is computed by ``girsanov_log_correction``.
    """
    increments_W = np.asarray(increments_W, dtype=np.float64)
    dt = grid.dt
    batch = increments_W.shape[:-2]
    x = np.broadcast_to(model.x0, batch + (model.dim_d,)).copy()
    out = np.empty(batch + (grid.n_steps + 1, model.dim_d))
    out[..., 0, :] = x
    for i in range(grid.n_steps):
        drift = model.b(x)
        if tilt_values is not None:
            drift = drift + _sigma_mul(model, x, tilt_values[i])
        x = x + drift * dt + eps * _sigma_mul(model, x, increments_W[..., i, :])
        _check_finite(x, i)
        out[..., i + 1, :] = x
    return out


def girsanov_log_correction(eps: float, grid: TimeGrid, increments_W: np.ndarray,
                            tilt_values: np.ndarray) -> np.ndarray:
    """Log weight restoring the untilted signal law for tilted samples.

    For paths simulated with the extra drift sigma(x) u(t) driven by
    increments dW, the untilted expectation of f equals the tilted
    expectation of f * exp(correction) with

        correction = -(1/eps) sum_i <u_i, dW_i> - (1/(2 eps^2)) sum_i ||u_i||^2 dt.
    """
    increments_W = np.asarray(increments_W, dtype=np.float64)
    u = np.asarray(tilt_values, dtype=np.float64)
    cross = np.einsum("...ik,ik->...", increments_W, u)
    energy = float(np.sum(u ** 2)) * grid.dt
    return -cross / eps - energy / (2.0 * eps ** 2)


def simulate_pair(model: ModelSpec, eps: float, grid: TimeGrid, seed: int):
    """Simulate the signal/observation pair on the grid.

    The observation accumulates the left-endpoint Riemann sum of h along
    the signal plus eps times Brownian noise, starting at zero.  eps = 0
    degenerates to the noiseless flow (RK4) with exact quadrature of h.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    dt = grid.dt
    if eps == 0.0:
        signal = integrate_flow(model, zero_control(grid, model.dim_k), grid)
        h_vals = model.h(signal.values[:-1])
        obs = np.concatenate([np.zeros((1, model.dim_m)), np.cumsum(h_vals * dt, axis=0)])
        return signal, Path(grid, obs)
    noise = draw_noise(model, grid, seed)
    signal_values = simulate_signal_values(model, eps, grid, noise.increments_W)
    h_vals = model.h(signal_values[:-1])
    obs_increments = h_vals * dt + eps * noise.increments_B
    obs = np.concatenate([np.zeros((1, model.dim_m)), np.cumsum(obs_increments, axis=0)])
    return Path(grid, signal_values), Path(grid, obs)
