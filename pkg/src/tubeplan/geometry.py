"""Sphere charts, tangent fields, and a serializable path expression tree.

Points are plain float ndarrays. Complex coordinates are realified by
interleaving, z_j = x[2j] + i*x[2j+1]; every module uses this layout.

Paths are closed expression trees evaluated lazily on [0, 1]. Nodes are
small dataclasses; evaluation has a scalar form (`at`) and a vectorized
form (`sample`) because the verification suites evaluate dense knot
grids per query.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import AtPole, DomainError, EvenAmbientDim, OddAmbientDim, ZeroVector

# Choice: absolute tolerances; all live quantities here are O(1) or scaled
# explicitly by callers, so relative forms buy nothing.
NORM_TOL = 1e-9       # on-sphere / endpoint checks
ZERO_TOL = 1e-12      # refuse to normalize below this norm
POLE_MARGIN = 1e-9    # stereographic chart domain guard: last coord < 1 - this
JUNCTION_TOL = 1e-9   # concatenation continuity at the midpoint
DOMAIN_TOL = 1e-12    # slack outside [0, 1] before DomainError


def normalize(v: np.ndarray) -> np.ndarray:
    """Return v / ||v||, raising ZeroVector when ||v|| <= ZERO_TOL."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n <= ZERO_TOL):
        raise ZeroVector(f"cannot normalize vector with norm {float(n.min()):.3e}")
    return v / n


def stereo_proj(x: np.ndarray) -> np.ndarray:
    """Chart S^m minus the north pole -> R^m.

    y_i = x_i / (1 - x_{m+1}). Accepts batches over leading axes.
    """
    x = np.asarray(x, dtype=float)
    denom = 1.0 - x[..., -1]
    if np.any(denom < POLE_MARGIN):
        raise AtPole("stereographic chart undefined this close to the north pole")
    return x[..., :-1] / denom[..., None]


def stereo_inv(y: np.ndarray) -> np.ndarray:
    """Inverse chart R^m -> S^m minus the north pole.

    (2y, ||y||^2 - 1) / (||y||^2 + 1). Never returns the pole itself.
    """
    y = np.asarray(y, dtype=float)
    s = np.sum(y * y, axis=-1)
    out = np.empty(y.shape[:-1] + (y.shape[-1] + 1,), dtype=float)
    out[..., :-1] = 2.0 * y / (s[..., None] + 1.0)
    out[..., -1] = (s - 1.0) / (s + 1.0)
    return out


def tangent_odd(x: np.ndarray) -> np.ndarray:
    """Unit tangent field on odd-dimensional spheres (even ambient dim).

    Rotates each coordinate pair a quarter turn:
    (x1, y1, ..., xl, yl) -> (-y1, x1, ..., -yl, xl).
    Nowhere zero; ||field(x)|| = ||x|| and <field(x), x> = 0.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] % 2 != 0:
        raise OddAmbientDim("quarter-turn field needs an even number of coordinates")
    out = np.empty_like(x)
    out[..., 0::2] = -x[..., 1::2]
    out[..., 1::2] = x[..., 0::2]
    return out


def tangent_even(x: np.ndarray) -> np.ndarray:
    """Tangent field on even-dimensional spheres (odd ambient dim).

    Fixes the first coordinate at zero and rotates the remaining pairs:
    (x1, x2, x3, ..., xm, x_{m+1}) -> (0, -x3, x2, ..., -x_{m+1}, xm).
    Vanishes exactly where all but the first coordinate vanish, i.e. at
    +-e1 on the unit sphere.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] % 2 != 1:
        raise EvenAmbientDim("skew field needs an odd number of coordinates")
    out = np.empty_like(x)
    out[..., 0] = 0.0
    out[..., 1::2] = -x[..., 2::2]
    out[..., 2::2] = x[..., 1::2]
    return out


def _segment_min_norm(a: np.ndarray, b: np.ndarray) -> float:
    """Exact minimum of ||(1-t)a + t b|| over t in [0, 1] (closed form)."""
    d = b - a
    dd = float(d @ d)
    if dd == 0.0:
        return float(np.linalg.norm(a))
    t = min(1.0, max(0.0, -float(a @ d) / dd))
    return float(np.linalg.norm((1.0 - t) * a + t * b))


class PathExpr:
    """A path [0, 1] -> R^k. Subclasses implement _eval / _eval_batch."""

    dim: int

    def at(self, t: float) -> np.ndarray:
        t = float(t)
        if t < -DOMAIN_TOL or t > 1.0 + DOMAIN_TOL:
            raise DomainError(f"path parameter {t!r} outside [0, 1]")
        return self._eval(min(1.0, max(0.0, t)))

    def sample(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if ts.size and (ts.min() < -DOMAIN_TOL or ts.max() > 1.0 + DOMAIN_TOL):
            raise DomainError("sample grid leaves [0, 1]")
        return self._eval_batch(np.clip(ts, 0.0, 1.0))

    def _eval(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def _eval_batch(self, ts: np.ndarray) -> np.ndarray:
        return np.stack([self._eval(float(t)) for t in ts])

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(PathExpr):
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))

    @property
    def dim(self) -> int:
        return self.point.shape[-1]

    def _eval(self, t: float) -> np.ndarray:
        return self.point.copy()

    def _eval_batch(self, ts: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.point, (ts.shape[0], self.point.shape[0])).copy()

    def to_dict(self) -> dict:
        return {"kind": "constant", "point": self.point.tolist()}


@dataclass(frozen=True)
class NormalizedSegment(PathExpr):
    """t -> ((1-t)a + t b) / ||.||; endpoints a/||a|| and b/||b||.

    Valid only when the chord avoids the origin; checked once at
    construction via the closed-form minimum of the chord norm.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("segment endpoints must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("segment endpoints must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if _segment_min_norm(a, b) <= ZERO_TOL:
            raise ZeroVector("chord passes through the origin; no normalized segment")

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def _eval(self, t: float) -> np.ndarray:
        return normalize((1.0 - t) * self.a + t * self.b)

    def _eval_batch(self, ts: np.ndarray) -> np.ndarray:
        pts = np.outer(1.0 - ts, self.a) + np.outer(ts, self.b)
        return pts / np.linalg.norm(pts, axis=1, keepdims=True)

    def to_dict(self) -> dict:
        return {"kind": "normalized_segment", "a": self.a.tolist(), "b": self.b.tolist()}


@dataclass(frozen=True)
class StereoSegment(PathExpr):
    """Straight chart-plane interpolation pulled back to the sphere.

    t -> inv_chart((1-t) chart(a) + t chart(b)); both endpoints must be
    unit vectors away from the north pole.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("segment endpoints must be 1-d arrays of equal length")
        for p in (a, b):
            if p[-1] >= 1.0 - POLE_MARGIN:
                raise AtPole("chart segment endpoint sits at the north pole")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_ya", stereo_proj(a))
        object.__setattr__(self, "_yb", stereo_proj(b))

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def _eval(self, t: float) -> np.ndarray:
        return stereo_inv((1.0 - t) * self._ya + t * self._yb)

    def _eval_batch(self, ts: np.ndarray) -> np.ndarray:
        ys = np.outer(1.0 - ts, self._ya) + np.outer(ts, self._yb)
        return stereo_inv(ys)

    def to_dict(self) -> dict:
        return {"kind": "stereo_segment", "a": self.a.tolist(), "b": self.b.tolist()}


@dataclass(frozen=True)
class Concat(PathExpr):
    """left on [0, 1/2], right on [1/2, 1], both at doubled speed."""

    left: PathExpr
    right: PathExpr

    def __post_init__(self):
        gap = float(np.linalg.norm(self.left.at(1.0) - self.right.at(0.0)))
        if gap > JUNCTION_TOL:
            raise ValueError(f"concatenation junction gap {gap:.3e} exceeds {JUNCTION_TOL:.0e}")

    @property
    def dim(self) -> int:
        return self.left.dim

    def _eval(self, t: float) -> np.ndarray:
        if t <= 0.5:
            return self.left.at(2.0 * t)
        return self.right.at(2.0 * t - 1.0)

    def _eval_batch(self, ts: np.ndarray) -> np.ndarray:
        out = np.empty((ts.shape[0], self.dim), dtype=float)
        lo = ts <= 0.5
        if np.any(lo):
            out[lo] = self.left.sample(2.0 * ts[lo])
        if np.any(~lo):
            out[~lo] = self.right.sample(2.0 * ts[~lo] - 1.0)
        return out

    def to_dict(self) -> dict:
        return {"kind": "concat", "left": self.left.to_dict(), "right": self.right.to_dict()}


@dataclass(frozen=True)
class Scaled(PathExpr):
    """Pointwise rescaling factor * path(t); moves unit-sphere paths to radius eta."""

    path: PathExpr
    factor: float

    @property
    def dim(self) -> int:
        return self.path.dim

    def _eval(self, t: float) -> np.ndarray:
        return self.factor * self.path.at(t)

    def _eval_batch(self, ts: np.ndarray) -> np.ndarray:
        return self.factor * self.path.sample(ts)

    def to_dict(self) -> dict:
        return {"kind": "scaled", "factor": float(self.factor), "path": self.path.to_dict()}


def _interleaved_to_complex(x: np.ndarray) -> np.ndarray:
    return x[..., 0::2] + 1j * x[..., 1::2]


def _complex_to_interleaved(z: np.ndarray) -> np.ndarray:
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],), dtype=float)
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


@dataclass(frozen=True)
class CircleActionLift(PathExpr):
    """Lift through the weighted circle action of a plane-valued germ.

    Rotates the start point by angle(t)/degree in each weighted
    coordinate. Two modes:

      * base given: angle(t) is the plane angle of base(t) relative to
        base(0). Pointwise exact provided the base piece sweeps less
        than a half turn, which holds for every normalized chord.
      * dphi given: angle(t) = dphi * t, a constant-speed arc; this is
        the full-loop form used for monodromy transport.
    """

    germ: object                      # needs .weights, .degree, .to_dict()
    start: np.ndarray
    dphi: Optional[float] = None
    base: Optional[PathExpr] = None

    def __post_init__(self):
        if (self.dphi is None) == (self.base is None):
            raise ValueError("exactly one of dphi / base must be given")
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
        object.__setattr__(self, "_z0", _interleaved_to_complex(self.start))
        object.__setattr__(self, "_w", np.asarray(self.germ.weights, dtype=float))
        if self.base is not None:
            w0 = self.base.at(0.0)
            if w0.shape != (2,):
                raise ValueError("circle-action lifting needs a plane-valued base path")
            object.__setattr__(self, "_w0", w0)

    @property
    def dim(self) -> int:
        return self.start.shape[0]

    def _angles(self, ts: np.ndarray) -> np.ndarray:
        if self.dphi is not None:
            return self.dphi * ts / float(self.germ.degree)
        w0 = self._w0
        wt = self.base.sample(ts)
        # relative plane angle in (-pi, pi]; exact for sub-half-turn pieces
        dot = wt[:, 0] * w0[0] + wt[:, 1] * w0[1]
        crs = wt[:, 1] * w0[0] - wt[:, 0] * w0[1]
        return np.arctan2(crs, dot) / float(self.germ.degree)

    def _eval(self, t: float) -> np.ndarray:
        return self._eval_batch(np.array([t]))[0]

    def _eval_batch(self, ts: np.ndarray) -> np.ndarray:
        theta = self._angles(ts)
        z = self._z0[None, :] * np.exp(1j * np.outer(theta, self._w))
        return _complex_to_interleaved(z)

    def to_dict(self) -> dict:
        return {
            "kind": "circle_action_lift",
            "germ": self.germ.to_dict(),
            "start": self.start.tolist(),
            "dphi": None if self.dphi is None else float(self.dphi),
            "base": None if self.base is None else self.base.to_dict(),
        }


@dataclass(frozen=True)
class NumericLift(PathExpr):
    """Tracked lift stored as a dense knot table plus Newton refinement.

    Evaluation interpolates the table linearly and, when the work map
    and base path are attached, polishes the interpolant back onto the
    level set {f(x) = base(t)}. Deserialized nodes without a work map
    fall back to plain interpolation.
    """

    knots: np.ndarray                 # (k,)
    points: np.ndarray                # (k, n)
    workmap: Optional[object] = None  # needs .f / .jac accepting batches
    base: Optional[PathExpr] = None
    newton_tol: float = 1e-10
    newton_iters: int = 8

    def __post_init__(self):
        object.__setattr__(self, "knots", np.asarray(self.knots, dtype=float))
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))
        if self.knots.ndim != 1 or self.points.shape[0] != self.knots.shape[0]:
            raise ValueError("knot vector and point table sizes disagree")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def _eval(self, t: float) -> np.ndarray:
        return self._eval_batch(np.array([t]))[0]

    def _eval_batch(self, ts: np.ndarray) -> np.ndarray:
        k = self.knots
        idx = np.clip(np.searchsorted(k, ts, side="right") - 1, 0, k.size - 2)
        span = k[idx + 1] - k[idx]
        lam = np.where(span > 0, (ts - k[idx]) / np.where(span > 0, span, 1.0), 0.0)
        out = (1.0 - lam)[:, None] * self.points[idx] + lam[:, None] * self.points[idx + 1]
        exact = np.minimum(np.abs(ts - k[idx]), np.abs(ts - k[idx + 1])) <= 1e-12
        if self.workmap is None or self.base is None or bool(np.all(exact)):
            return out
        need = ~exact
        out[need] = self._refine(out[need], self.base.sample(ts[need]))
        return out

    def _refine(self, xs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        xs = xs.copy()
        for _ in range(self.newton_iters):
            r = np.atleast_2d(self.workmap.f(xs)) - targets
            if float(np.abs(r).max(initial=0.0)) <= self.newton_tol:
                break
            J = self.workmap.jac(xs)
            if J.ndim == 2:
                J = J[None, :, :]
            JJt = J @ np.swapaxes(J, 1, 2)
            det_ok = np.abs(np.linalg.det(JJt)) > 1e-300
            if not np.any(det_ok):
                break
            lam = np.linalg.solve(JJt[det_ok], r[det_ok][..., None])[..., 0]
            xs[det_ok] -= np.einsum("kpn,kp->kn", J[det_ok], lam)
        return xs

    def to_dict(self) -> dict:
        wm = None
        descr = getattr(self.workmap, "descriptor", None)
        if callable(descr):
            wm = descr()
        return {
            "kind": "numeric_lift",
            "knots": self.knots.tolist(),
            "points": self.points.tolist(),
            "newton_tol": float(self.newton_tol),
            "newton_iters": int(self.newton_iters),
            "workmap": wm,
            "base": None if self.base is None else self.base.to_dict(),
        }


def path_eval(path: PathExpr, t: float) -> np.ndarray:
    """Evaluate a path expression at a single parameter value."""
    return path.at(t)


# --- serialization ---------------------------------------------------------

# Deserializers for node kinds that depend on germs/work maps register
# themselves here from the modules that own those objects.
NODE_PARSERS: dict[str, Callable[[dict], PathExpr]] = {}


def _parse_basic(d: dict) -> PathExpr:
    kind = d["kind"]
    if kind == "constant":
        return Constant(np.asarray(d["point"]))
    if kind == "normalized_segment":
        return NormalizedSegment(np.asarray(d["a"]), np.asarray(d["b"]))
    if kind == "stereo_segment":
        return StereoSegment(np.asarray(d["a"]), np.asarray(d["b"]))
    if kind == "concat":
        return Concat(path_from_dict(d["left"]), path_from_dict(d["right"]))
    if kind == "scaled":
        return Scaled(path_from_dict(d["path"]), float(d["factor"]))
    raise ValueError(f"unknown path node kind {kind!r}")


def path_from_dict(d: dict) -> PathExpr:
    kind = d.get("kind")
    if kind in NODE_PARSERS:
        return NODE_PARSERS[kind](d)
    return _parse_basic(d)


def path_to_json(path: PathExpr) -> str:
    return json.dumps(path.to_dict(), sort_keys=True)


def path_from_json(s: str) -> PathExpr:
    return path_from_dict(json.loads(s))


def write_path_csv(path: PathExpr, ts: np.ndarray, fh) -> None:
    """Write sampled path rows `t,x1,...,xk` with a header line."""
    ts = np.asarray(ts, dtype=float)
    pts = path.sample(ts)
    writer = csv.writer(fh)
    writer.writerow(["t"] + [f"x{i + 1}" for i in range(pts.shape[1])])
    for t, row in zip(ts, pts):
        writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])
