"""Work maps, path-lifting oracles, and pullback tasking planners.

A work map sends configurations in R^n to task values on a sphere of
radius eta in R^p. Planning a task means: project the start
configuration down, plan on the sphere with the region planners from
`sphere_planner`, and lift the base path back up through the map. The
lift is what distinguishes maps: plane-valued weighted-homogeneous
germs admit an exact lift through their circle action, everything else
is tracked numerically by a predictor-corrector continuation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import LiftFailure, Uncovered
from .geometry import (
    CircleActionLift,
    Concat,
    Constant,
    NODE_PARSERS,
    NormalizedSegment,
    NumericLift,
    PathExpr,
    Scaled,
    normalize,
    path_from_dict,
)
from .sphere_planner import DEFAULT_MARGIN, SpherePlanner, build_planner

# Choice: 10x the per-kind lift tolerance is how far a start configuration
# may sit off the base point before lifting refuses the query.
EXACT_LIFT_TOL = 1e-12
NUMERIC_LIFT_TOL = 1e-6


@dataclass(frozen=True)
class WorkMap:
    """A smooth map R^n -> R^p restricted over the radius-eta task sphere.

    f and jac must accept batches over leading axes: f maps (..., n) to
    (..., p) and jac maps (..., n) to (..., p, n). sampler draws one
    configuration over a uniformly random task value; sampler_batch is
    the vectorized form the verification suites prefer.
    """

    n: int
    p: int
    f: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray]
    eta: float
    name: str = ""
    germ: Optional[object] = None
    sampler: Optional[Callable[[np.random.Generator], np.ndarray]] = None
    sampler_batch: Optional[Callable[[np.random.Generator, int], np.ndarray]] = None
    singular_values: Optional[np.ndarray] = None
    flags: Optional[dict] = None

    def descriptor(self) -> Optional[dict]:
        if self.germ is not None:
            return {"kind": "germ", "germ": self.germ.to_dict()}
        if self.name in NAMED_WORKMAPS:
            return {"kind": "named", "name": self.name}
        return None

    def sample(self, rng: np.random.Generator, k: int) -> np.ndarray:
        if self.sampler_batch is not None:
            return self.sampler_batch(rng, k)
        if self.sampler is not None:
            return np.stack([self.sampler(rng) for _ in range(k)])
        raise ValueError(f"work map {self.name!r} has no domain sampler")


def jacobian_fd(wm: WorkMap, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian, the independent check for wm.jac."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.shape[0]):
        step = h * max(1.0, abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += step
        xm[j] -= step
        cols.append((wm.f(xp) - wm.f(xm)) / (2.0 * step))
    return np.stack(cols, axis=-1)


def newton_project(
    f: Callable[[np.ndarray], np.ndarray],
    jac: Callable[[np.ndarray], np.ndarray],
    x0s: np.ndarray,
    targets: np.ndarray,
    tol: float = 1e-12,
    max_iter: int = 50,
    blowup: float = 1e6,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched Gauss-Newton projection onto {f(x) = target}.

    Minimum-norm updates dx = J^T (J J^T)^{-1} r. Rows whose normal
    matrix degenerates or whose iterates blow up are reported as not
    converged; survivors satisfy ||f(x) - target|| <= tol.
    """
    xs = np.array(x0s, dtype=float)
    targets = np.asarray(targets, dtype=float)
    k = xs.shape[0]
    active = np.ones(k, dtype=bool)
    for _ in range(max_iter):
        if not np.any(active):
            break
        r = np.atleast_2d(f(xs[active])) - targets[active]
        resid = np.linalg.norm(r, axis=1)
        done = resid <= tol
        if np.any(done):
            idx = np.flatnonzero(active)[done]
            active[idx] = False
            r = r[~done]
            if r.shape[0] == 0:
                continue
        rows = np.flatnonzero(active)
        J = jac(xs[rows])
        JJt = J @ np.swapaxes(J, 1, 2)
        det = np.abs(np.linalg.det(JJt))
        ok = det > 1e-300
        bad = rows[~ok]
        xs[bad] = np.nan  # degenerate normal matrix: give up on the row
        active[bad] = False
        rows = rows[ok]
        if rows.size == 0:
            continue
        lam = np.linalg.solve(JJt[ok], r[ok][..., None])[..., 0]
        dx = np.einsum("kpn,kp->kn", J[ok], lam)
        xs[rows] -= dx
        wild = ~np.all(np.isfinite(xs[rows]), axis=1) | (
            np.linalg.norm(dx, axis=1) > blowup
        )
        if np.any(wild):
            xs[rows[wild]] = np.nan
            active[rows[wild]] = False
    finite = np.all(np.isfinite(xs), axis=1)
    res = np.full(k, np.inf)
    if np.any(finite):
        res[finite] = np.linalg.norm(
            np.atleast_2d(f(xs[finite])) - targets[finite], axis=1
        )
    return xs, res <= tol


def _minnorm_solve(J: np.ndarray, r: np.ndarray) -> np.ndarray:
    return np.linalg.lstsq(J, r, rcond=None)[0]


@dataclass(frozen=True)
class ExactCircleOracle:
    """Exact lifting through the weighted circle action of a plane germ.

    Only defined for work maps carrying a weighted-homogeneous germ
    with a plane target. Base paths must be built from normalized
    chords (each piece sweeps less than a half turn, so the relative
    plane angle is unambiguous pointwise).
    """

    lift_tol: float = EXACT_LIFT_TOL
    kind: str = "exact"

    def lift(self, wm: WorkMap, e: np.ndarray, path: PathExpr) -> PathExpr:
        if wm.germ is None or wm.p != 2:
            raise ValueError("exact lifting needs a plane-valued germ work map")
        e = np.asarray(e, dtype=float)
        gap = float(np.linalg.norm(wm.f(e) - path.at(0.0)))
        if gap > 10.0 * self.lift_tol:
            raise ValueError(f"start sits {gap:.3e} off the base point")
        return self._lift(wm.germ, e, path)

    def _lift(self, germ, x0: np.ndarray, path: PathExpr) -> PathExpr:
        if isinstance(path, Scaled):
            inner = path.path
            if isinstance(inner, Concat):
                path = Concat(
                    Scaled(inner.left, path.factor), Scaled(inner.right, path.factor)
                )
            elif isinstance(inner, Constant):
                return Constant(x0)
        if isinstance(path, Concat):
            left = self._lift(germ, x0, path.left)
            right = self._lift(germ, left.at(1.0), path.right)
            return Concat(left, right)
        if isinstance(path, Constant):
            return Constant(x0)
        leaf = path.path if isinstance(path, Scaled) else path
        if not isinstance(leaf, NormalizedSegment):
            raise ValueError(
                f"cannot lift {type(leaf).__name__} exactly; only normalized chords sweep < pi"
            )
        return CircleActionLift(germ=germ, start=x0, base=path)


@dataclass(frozen=True)
class NumericOracle:
    """Predictor-corrector continuation lift along the base path.

    Tangent predictor from the minimum-norm solve of Df . dx = dgamma,
    Newton corrector back onto the level set, recursive step halving on
    corrector failure. The result is a dense knot table wrapped in a
    NumericLift node.

    Goals within singular_margin of a declared rank-drop value of the
    work map are refused up front: the fiber degenerates there and the
    tracked endpoint could not be certified.
    """

    lift_tol: float = NUMERIC_LIFT_TOL
    n_knots: int = 256
    newton_tol: float = 1e-10
    max_newton_iter: int = 25
    max_halvings: int = 12
    singular_margin: float = 1e-2
    kind: str = "numeric"

    def lift(self, wm: WorkMap, e: np.ndarray, path: PathExpr) -> PathExpr:
        e = np.asarray(e, dtype=float)
        gap = float(np.linalg.norm(wm.f(e) - path.at(0.0)))
        if gap > 10.0 * self.lift_tol:
            raise ValueError(f"start sits {gap:.3e} off the base point")
        if wm.singular_values is not None:
            goal = path.at(1.0)
            d = float(np.min(np.linalg.norm(wm.singular_values - goal, axis=1)))
            if d < self.singular_margin:
                raise LiftFailure(
                    1.0,
                    f"goal lies {d:.3e} from a rank-drop value of {wm.name!r}; "
                    f"tracking is refused inside margin {self.singular_margin:.0e}",
                )
        ts = np.linspace(0.0, 1.0, self.n_knots)
        xs = np.empty((self.n_knots, e.shape[0]), dtype=float)
        xs[0] = e
        for k in range(self.n_knots - 1):
            xs[k + 1] = self._track(wm, path, xs[k], ts[k], ts[k + 1], 0)
        return NumericLift(
            knots=ts,
            points=xs,
            workmap=wm,
            base=path,
            newton_tol=self.newton_tol,
            newton_iters=self.max_newton_iter,
        )

    def _track(self, wm, path, x, t0, t1, depth) -> np.ndarray:
        target = path.at(t1)
        dgamma = target - path.at(t0)
        J = np.asarray(wm.jac(x), dtype=float)
        xpred = x + _minnorm_solve(J, dgamma)
        xnew, ok = self._newton(wm, xpred, target)
        if ok:
            return xnew
        if depth >= self.max_halvings:
            raise LiftFailure(t0, f"corrector diverged after {depth} halvings")
        tm = 0.5 * (t0 + t1)
        xm = self._track(wm, path, x, t0, tm, depth + 1)
        return self._track(wm, path, xm, tm, t1, depth + 1)

    def _newton(self, wm, x, target) -> tuple[np.ndarray, bool]:
        x = np.array(x, dtype=float)
        for _ in range(self.max_newton_iter):
            r = wm.f(x) - target
            if not np.all(np.isfinite(r)):
                return x, False
            if float(np.linalg.norm(r)) <= self.newton_tol:
                return x, True
            dx = _minnorm_solve(np.asarray(wm.jac(x), dtype=float), r)
            if not np.all(np.isfinite(dx)) or float(np.linalg.norm(dx)) > 1e3:
                return x, False
            x = x - dx
        return x, float(np.linalg.norm(wm.f(x) - target)) <= self.newton_tol


def lift(oracle, wm: WorkMap, e: np.ndarray, path: PathExpr) -> PathExpr:
    """Lift a base path through the work map, starting at e."""
    return oracle.lift(wm, e, path)


@dataclass(frozen=True)
class TaskingPlanner:
    """Pullback of a sphere planner through a work map.

    Regions are the preimages of the base regions, so the region count
    is inherited; membership of (e, w) is membership of the projected
    pair (f(e)/eta, w/eta) downstairs.
    """

    workmap: WorkMap
    base: SpherePlanner
    oracle: object

    def __post_init__(self):
        if len(self.base.regions) < 2:
            raise ValueError(
                "refusing a single-region planner over a sphere base: "
                "spheres admit no global planning rule"
            )
        if self.base.m != self.workmap.p - 1:
            raise ValueError(
                f"base planner lives on S^{self.base.m} but the work map "
                f"targets S^{self.workmap.p - 1}"
            )

    @property
    def regions(self):
        return self.base.regions

    @property
    def delta(self) -> float:
        return self.base.delta

    @property
    def eta(self) -> float:
        return self.workmap.eta

    def _base_pair(self, e: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        e = np.asarray(e, dtype=float)
        w = np.asarray(w, dtype=float)
        fe = self.workmap.f(e)
        scale = max(1.0, self.eta)
        if abs(float(np.linalg.norm(fe)) - self.eta) > 1e-6 * scale:
            raise ValueError("start configuration does not sit over the task sphere")
        if abs(float(np.linalg.norm(w)) - self.eta) > 1e-6 * scale:
            raise ValueError("goal value does not sit on the task sphere")
        return normalize(fe), normalize(w)

    def dispatch(self, e: np.ndarray, w: np.ndarray) -> int:
        th1, th2 = self._base_pair(e, w)
        return self.base.dispatch(th1, th2)

    def plan(self, e: np.ndarray, w: np.ndarray) -> tuple[int, PathExpr]:
        """Return (region index, lifted path from e onto the fiber of w)."""
        e = np.asarray(e, dtype=float)
        th1, th2 = self._base_pair(e, w)
        idx = self.base.dispatch(th1, th2)
        region = self.base.regions[idx - 1]
        gamma = Scaled(region.build(th1, th2, self.base.delta), self.eta)
        return idx, self.oracle.lift(self.workmap, e, gamma)


def pullback_planner(
    wm: WorkMap,
    base: Optional[SpherePlanner] = None,
    oracle: Optional[object] = None,
    delta: float = DEFAULT_MARGIN,
) -> TaskingPlanner:
    """Tasking planner over a work map, defaulting to the right oracle.

    Germ-backed plane-valued maps lift exactly; everything else gets the
    numeric continuation oracle.
    """
    if base is None:
        base = build_planner(wm.p - 1, delta)
    if oracle is None:
        if wm.germ is not None and wm.p == 2:
            oracle = ExactCircleOracle()
        else:
            oracle = NumericOracle()
    return TaskingPlanner(workmap=wm, base=base, oracle=oracle)


# --- concrete non-germ work maps -------------------------------------------


def _rr_f(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    a, b = x[..., 0], x[..., 1]
    return np.stack(
        [np.cos(a) * np.cos(b), np.cos(a) * np.sin(b), np.sin(a)], axis=-1
    )


def _rr_jac(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    a, b = x[..., 0], x[..., 1]
    J = np.empty(x.shape[:-1] + (3, 2), dtype=float)
    J[..., 0, 0] = -np.sin(a) * np.cos(b)
    J[..., 0, 1] = -np.cos(a) * np.sin(b)
    J[..., 1, 0] = -np.sin(a) * np.sin(b)
    J[..., 1, 1] = np.cos(a) * np.cos(b)
    J[..., 2, 0] = np.cos(a)
    J[..., 2, 1] = 0.0
    return J


def rr_arm_workmap() -> WorkMap:
    """Two-joint arm direction map: angles (shoulder, azimuth) -> S^2.

    Not a fibration: the differential drops rank where the arm points
    straight up or down, and the fiber over those two values is a whole
    circle instead of two points. Declared as rank-drop values so the
    numeric oracle refuses goals too close to them.
    """
    return WorkMap(
        n=2,
        p=3,
        f=_rr_f,
        jac=_rr_jac,
        eta=1.0,
        name="rr_arm",
        sampler=lambda rng: rng.uniform(-math.pi, math.pi, 2),
        sampler_batch=lambda rng, k: rng.uniform(-math.pi, math.pi, (k, 2)),
        singular_values=np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]),
    )


# --- deserialization hooks ---------------------------------------------------

# Named work maps that numeric-lift nodes may reference in JSON.
NAMED_WORKMAPS: dict[str, Callable[[], WorkMap]] = {"rr_arm": rr_arm_workmap}

# Work-map descriptor parsers; the germ entry is added by the milnor module.
WORKMAP_PARSERS: dict[str, Callable[[dict], WorkMap]] = {
    "named": lambda d: NAMED_WORKMAPS[d["name"]]()
}


def _parse_numeric_lift(d: dict) -> NumericLift:
    wm = None
    wdescr = d.get("workmap")
    if wdescr and wdescr.get("kind") in WORKMAP_PARSERS:
        wm = WORKMAP_PARSERS[wdescr["kind"]](wdescr)
    base = path_from_dict(d["base"]) if d.get("base") else None
    return NumericLift(
        knots=np.asarray(d["knots"], dtype=float),
        points=np.asarray(d["points"], dtype=float),
        workmap=wm,
        base=base,
        newton_tol=float(d.get("newton_tol", 1e-10)),
        newton_iters=int(d.get("newton_iters", 8)),
    )


NODE_PARSERS["numeric_lift"] = _parse_numeric_lift
