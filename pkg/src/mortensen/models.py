"""Filtering model definitions and the built-in model catalog.

A model is the triple of maps (drift, diffusion, observation) together
with a fixed initial state and horizon.  All maps are numpy-vectorized
over leading batch axes: drift (..., d) -> (..., d), diffusion
(..., d) -> (..., d, k), observation (..., d) -> (..., m).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ParamOutOfRange, UnknownModel
from .rng import stream

FD_STEP = 1e-5


def _fd_jacobian(fn, out_shape):
    """Central finite-difference Jacobian of a vectorized map.

    Returns a map (..., d) -> (..., *out_shape, d).
    """

    def jac(x):
        x = np.asarray(x, dtype=np.float64)
        d = x.shape[-1]
        cols = []
        for j in range(d):
            e = np.zeros(d)
            e[j] = FD_STEP
            cols.append((fn(x + e) - fn(x - e)) / (2.0 * FD_STEP))
        return np.stack(cols, axis=-1)

    return jac


@dataclass(frozen=True)
class ModelSpec:
    """Immutable description of one filtering problem.

    Immutability makes instances safe to share across concurrent workers.
    ``c_lip`` bounds the summed Lipschitz constants of (b, sigma, h) and
    ``c_sigma`` bounds the diffusion norm; both are declared by the
    builder and hold on the box |x - x0| <= lip_box_radius.
    """

    dim_d: int
    dim_k: int
    dim_m: int
    x0: np.ndarray
    horizon_T: float
    b: Callable[[np.ndarray], np.ndarray]
    sigma: Callable[[np.ndarray], np.ndarray]
    h: Callable[[np.ndarray], np.ndarray]
    h_grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    b_grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    sigma_grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    c_lip: float = np.inf
    c_sigma: float = np.inf
    lip_box_radius: float = 2.0
    name: str = "custom"
    params: dict = field(default_factory=dict)
    # (A, S, C) matrices when the model is linear-Gaussian: b=Ax, sigma=S, h=Cx
    linear: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "x0", np.atleast_1d(np.asarray(self.x0, dtype=np.float64)))
        if self.h_grad is None:
            object.__setattr__(self, "h_grad", _fd_jacobian(self.h, (self.dim_m,)))
        if self.b_grad is None:
            object.__setattr__(self, "b_grad", _fd_jacobian(self.b, (self.dim_d,)))
        if self.sigma_grad is None:
            object.__setattr__(
                self, "sigma_grad", _fd_jacobian(self.sigma, (self.dim_d, self.dim_k))
            )
        self.check_at_initial()

    def check_at_initial(self):
        """Evaluate all maps at x0 and verify shapes and finiteness."""
        x = self.x0
        if x.shape != (self.dim_d,):
            raise ValueError(f"x0 has shape {x.shape}, expected ({self.dim_d},)")
        if not (np.isfinite(self.horizon_T) and self.horizon_T > 0):
            raise ValueError(f"horizon_T must be positive and finite, got {self.horizon_T}")
        checks = [
            ("b", self.b(x), (self.dim_d,)),
            ("sigma", self.sigma(x), (self.dim_d, self.dim_k)),
            ("h", self.h(x), (self.dim_m,)),
        ]
        for label, val, shape in checks:
            val = np.asarray(val)
            if val.shape != shape:
                raise ValueError(f"{label}(x0) has shape {val.shape}, expected {shape}")
            if not np.all(np.isfinite(val)):
                raise ValueError(f"{label}(x0) is not finite")


@dataclass(frozen=True)
class CatalogEntry:
    """A named model family: parameter schema plus builder."""

    name: str
    parameter_schema: dict  # param -> (low, high, default)
    builder: Callable[[dict], ModelSpec]

    def build(self, params: dict) -> ModelSpec:
        resolved = {}
        for key, (low, high, default) in self.parameter_schema.items():
            value = float(params.get(key, default))
            if not (low <= value <= high) or not np.isfinite(value):
                raise ParamOutOfRange(key, value, low, high)
            resolved[key] = value
        for key in params:
            if key not in self.parameter_schema:
                raise ParamOutOfRange(key, params[key], "n/a", "n/a")
        return self.builder(resolved)


def _const_sigma(s: float, d: int, k: int):
    mat = s * np.eye(d, k)

    def sigma(x):
        x = np.asarray(x, dtype=np.float64)
        return np.broadcast_to(mat, x.shape[:-1] + (d, k)).copy()

    def sigma_grad(x):
        x = np.asarray(x, dtype=np.float64)
        return np.zeros(x.shape[:-1] + (d, k, d))

    return sigma, sigma_grad


def _linear1d(p: dict) -> ModelSpec:
    a, s, c = p["a"], p["s"], p["c"]
    sigma, sigma_grad = _const_sigma(s, 1, 1)

    def b(x):
        return a * np.asarray(x, dtype=np.float64)

    def b_grad(x):
        x = np.asarray(x, dtype=np.float64)
        return np.broadcast_to(a, x.shape[:-1] + (1, 1)).copy()

    def h(x):
        return c * np.asarray(x, dtype=np.float64)

    def h_grad(x):
        x = np.asarray(x, dtype=np.float64)
        return np.broadcast_to(c, x.shape[:-1] + (1, 1)).copy()

    return ModelSpec(
        dim_d=1, dim_k=1, dim_m=1,
        x0=np.array([p["x0"]]), horizon_T=p["T"],
        b=b, sigma=sigma, h=h,
        h_grad=h_grad, b_grad=b_grad, sigma_grad=sigma_grad,
        c_lip=abs(a) + abs(c), c_sigma=abs(s),
        name="linear1d", params=dict(p),
        linear=(np.array([[a]]), np.array([[s]]), np.array([[c]])),
    )


def _ou_nlobs(p: dict) -> ModelSpec:
    a, s, c = p["a"], p["s"], p["c"]
    sigma, sigma_grad = _const_sigma(s, 1, 1)

    def b(x):
        return -a * np.asarray(x, dtype=np.float64)

    def b_grad(x):
        x = np.asarray(x, dtype=np.float64)
        return np.broadcast_to(-a, x.shape[:-1] + (1, 1)).copy()

    def h(x):
        return np.sin(c * np.asarray(x, dtype=np.float64))

    def h_grad(x):
        x = np.asarray(x, dtype=np.float64)
        return (c * np.cos(c * x))[..., None]

    return ModelSpec(
        dim_d=1, dim_k=1, dim_m=1,
        x0=np.array([p["x0"]]), horizon_T=p["T"],
        b=b, sigma=sigma, h=h,
        h_grad=h_grad, b_grad=b_grad, sigma_grad=sigma_grad,
        c_lip=abs(a) + abs(c), c_sigma=abs(s),
        name="ou_nlobs", params=dict(p),
    )


def _doublewell(p: dict) -> ModelSpec:
    s = p["s"]
    sigma, sigma_grad = _const_sigma(s, 1, 1)
    box = 2.0
    # cubic drift is only locally Lipschitz; declare the bound on the box
    lip_b = max(1.0, 3.0 * (abs(p["x0"]) + box) ** 2 - 1.0)

    def b(x):
        x = np.asarray(x, dtype=np.float64)
        return x - x ** 3

    def b_grad(x):
        x = np.asarray(x, dtype=np.float64)
        return (1.0 - 3.0 * x ** 2)[..., None]

    def h(x):
        return np.asarray(x, dtype=np.float64).copy()

    def h_grad(x):
        x = np.asarray(x, dtype=np.float64)
        return np.ones(x.shape[:-1] + (1, 1))

    return ModelSpec(
        dim_d=1, dim_k=1, dim_m=1,
        x0=np.array([p["x0"]]), horizon_T=p["T"],
        b=b, sigma=sigma, h=h,
        h_grad=h_grad, b_grad=b_grad, sigma_grad=sigma_grad,
        c_lip=lip_b + 1.0, c_sigma=abs(s), lip_box_radius=box,
        name="doublewell", params=dict(p),
    )


_CATALOG: dict[str, CatalogEntry] = {}


def register_model(entry: CatalogEntry):
    """Extension point: add a user-defined model family to the catalog."""
    _CATALOG[entry.name] = entry


def catalog_names():
    return sorted(_CATALOG)


register_model(CatalogEntry(
    name="linear1d",
    parameter_schema={
        "a": (-10.0, 10.0, -1.0),
        "s": (0.0, 10.0, 1.0),
        "c": (-10.0, 10.0, 1.0),
        "x0": (-10.0, 10.0, 1.0),
        "T": (1e-6, 10.0, 1.0),
    },
    builder=_linear1d,
))
register_model(CatalogEntry(
    name="ou_nlobs",
    parameter_schema={
        "a": (-10.0, 10.0, 1.0),
        "s": (0.0, 10.0, 1.0),
        "c": (-10.0, 10.0, 2.0),
        "x0": (-10.0, 10.0, 1.0),
        "T": (1e-6, 10.0, 1.0),
    },
    builder=_ou_nlobs,
))
register_model(CatalogEntry(
    name="doublewell",
    parameter_schema={
        "s": (0.0, 10.0, 0.5),
        "x0": (-10.0, 10.0, 0.0),
        "T": (1e-6, 10.0, 1.0),
    },
    builder=_doublewell,
))


def build_model(name: str, params: Optional[dict] = None) -> ModelSpec:
    """Build a catalog model, validating parameters against the schema."""
    if name not in _CATALOG:
        raise UnknownModel(f"unknown model {name!r}; catalog: {catalog_names()}")
    return _CATALOG[name].build(params or {})


@dataclass
class ValidationReport:
    """Sampled numerical check of model regularity assumptions."""

    model_name: str
    n_samples: int
    box_radius: float
    lipschitz: dict      # map label -> estimated Lipschitz constant
    sigma_max: float     # max sampled operator norm of the diffusion
    declared_c_lip: float
    declared_c_sigma: float
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_model(model: ModelSpec, n_samples: int = 200, box_radius: float = 2.0,
                   seed: int = 0) -> ValidationReport:
    """Estimate Lipschitz constants and the diffusion bound by sampling.

    Draws points uniformly in the box x0 +- box_radius, adds a tightly
    spaced companion to each point so local derivative peaks are seen,
    and takes the max pairwise difference ratio per map.  Report-only:
    violations of the declared bounds are flagged, never raised.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    rng = stream(seed)
    d = model.dim_d
    base = model.x0 + rng.uniform(-box_radius, box_radius, size=(n_samples, d))
    near = base + rng.normal(scale=1e-4, size=base.shape)
    pts = np.concatenate([base, near], axis=0)

    def flat_vals(fn):
        return fn(pts).reshape(len(pts), -1)

    lipschitz = {}
    iu, ju = np.triu_indices(len(pts), k=1)
    dx = np.linalg.norm(pts[iu] - pts[ju], axis=1)
    keep = dx > 1e-12
    for label, fn in (("b", model.b), ("sigma", model.sigma), ("h", model.h)):
        vals = flat_vals(fn)
        dv = np.linalg.norm(vals[iu] - vals[ju], axis=1)
        lipschitz[label] = float(np.max(dv[keep] / dx[keep]))

    sig = model.sigma(pts)
    sigma_max = float(np.max(np.linalg.norm(sig, axis=(-2, -1))))

    violations = []
    lip_total = sum(lipschitz.values())
    if lip_total > model.c_lip * 1.01:
        violations.append(
            f"summed Lipschitz estimate {lip_total:.6g} exceeds declared {model.c_lip:.6g}"
        )
    if sigma_max > model.c_sigma * 1.01:
        violations.append(
            f"sigma norm {sigma_max:.6g} exceeds declared bound {model.c_sigma:.6g}"
        )
    return ValidationReport(
        model_name=model.name,
        n_samples=n_samples,
        box_radius=box_radius,
        lipschitz=lipschitz,
        sigma_max=sigma_max,
        declared_c_lip=model.c_lip,
        declared_c_sigma=model.c_sigma,
        violations=violations,
    )
