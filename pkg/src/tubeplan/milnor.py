"""Weighted-homogeneous plane-valued germs and their tube fibrations.

A germ here is a polynomial map C^k -> C whose monomials all satisfy
sum_j weight_j * exponent_j = degree. Such maps carry a weighted circle
action rho_theta(z)_j = exp(i w_j theta) z_j with
f(rho_theta z) = exp(i d theta) f(z), which is what makes exact path
lifting and monodromy transport possible.

The tube of a germ is the set of ball points whose value lands on the
radius-eta circle. Fibers over single values are sampled by Newton
projection of random seeds and split into connected components through
a proximity graph.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import AmbiguousAssignment, TooFewPoints
from .fibration import NAMED_WORKMAPS, WORKMAP_PARSERS, WorkMap, newton_project
from .geometry import CircleActionLift, NODE_PARSERS, normalize, path_from_dict

TRI_STATES = ("yes", "no", "unknown")

FIBER_TOL = 1e-9       # accepted samples satisfy ||f(x) - target|| below this
TUBE_TOL = 1e-9        # TubePoint invariant on | ||f|| - eta | and ball excess
# Choice: floor under the adaptive proximity radius; zero-dimensional fibers
# collapse each root to a cluster of Newton duplicates whose spacing is pure
# roundoff, and 3x the median neighbor gap alone would underrate it.
RADIUS_FLOOR = 1e-9
PROBE_THRESHOLD = 1e-6  # regularity verdict needs both minima above this


def _check_tri(value: str, what: str) -> str:
    if value not in TRI_STATES:
        raise ValueError(f"{what} must be one of {TRI_STATES}, got {value!r}")
    return value


@dataclass(frozen=True)
class GermFlags:
    """Declared topological facts; 'unknown' keeps certificates honest."""

    link_nonempty: str = "unknown"
    pi_trivial: str = "unknown"

    def __post_init__(self):
        _check_tri(self.link_nonempty, "link_nonempty")
        _check_tri(self.pi_trivial, "pi_trivial")

    def to_dict(self) -> dict:
        return {"link_nonempty": self.link_nonempty, "pi_trivial": self.pi_trivial}


@dataclass(frozen=True)
class Germ:
    """Weighted-homogeneous polynomial germ C^ncx -> C.

    Real layout: a configuration is a float vector of length 2*ncx with
    z_j = x[2j] + i x[2j+1]; values are (Re f, Im f).
    """

    name: str
    ncx: int
    monomials: tuple[tuple[complex, tuple[int, ...]], ...]
    weights: tuple[int, ...]
    degree: int
    epsilon: float = 0.5
    eta: Optional[float] = None
    flags: GermFlags = field(default_factory=GermFlags)

    def __post_init__(self):
        if self.ncx < 1:
            raise ValueError("need at least one complex variable")
        if len(self.weights) != self.ncx or any(
            not isinstance(w, int) or w < 1 for w in self.weights
        ):
            raise ValueError("weights must be positive integers, one per variable")
        if not isinstance(self.degree, int) or self.degree < 1:
            raise ValueError("degree must be a positive integer")
        if not self.monomials:
            raise ValueError("germ needs at least one monomial")
        for coeff, expo in self.monomials:
            if len(expo) != self.ncx or any(not isinstance(e, int) or e < 0 for e in expo):
                raise ValueError(f"bad exponent vector {expo!r}")
            if complex(coeff) == 0:
                raise ValueError("zero monomial coefficient")
            graded = sum(w * e for w, e in zip(self.weights, expo))
            if graded != self.degree:
                raise ValueError(
                    f"monomial {expo!r} has graded degree {graded}, expected {self.degree}"
                )
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be positive and finite")
        bound = self.eta_bound()
        if self.eta is None:
            object.__setattr__(self, "eta", bound)
        elif not (0.0 < self.eta <= bound * (1.0 + 1e-9)):
            raise ValueError(
                f"eta = {self.eta!r} outside (0, {bound:.6g}]; small tube radii keep "
                "the tube inside the ball"
            )

    def eta_bound(self) -> float:
        """Default tube radius: epsilon^(degree/min weight) with headroom 10."""
        return self.epsilon ** (self.degree / min(self.weights)) / 10.0

    @property
    def n(self) -> int:
        return 2 * self.ncx

    # -- evaluation ----------------------------------------------------------

    def eval_complex(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape[:-1], dtype=complex)
        for coeff, expo in self.monomials:
            out = out + coeff * np.prod(z ** np.asarray(expo), axis=-1)
        return out

    def grad_complex(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        g = np.zeros(z.shape, dtype=complex)
        for coeff, expo in self.monomials:
            for j, e in enumerate(expo):
                if e == 0:
                    continue
                shifted = list(expo)
                shifted[j] = e - 1
                g[..., j] += coeff * e * np.prod(z ** np.asarray(shifted), axis=-1)
        return g

    def f_real(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = self.eval_complex(x[..., 0::2] + 1j * x[..., 1::2])
        return np.stack([v.real, v.imag], axis=-1)

    def jac_real(self, x: np.ndarray) -> np.ndarray:
        """Realified Jacobian (..., 2, 2*ncx) of (Re f, Im f)."""
        x = np.asarray(x, dtype=float)
        g = self.grad_complex(x[..., 0::2] + 1j * x[..., 1::2])
        J = np.empty(x.shape[:-1] + (2, 2 * self.ncx), dtype=float)
        J[..., 0, 0::2] = g.real
        J[..., 0, 1::2] = -g.imag
        J[..., 1, 0::2] = g.imag
        J[..., 1, 1::2] = g.real
        return J

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "complex_vars": self.ncx,
            "monomials": [
                {"coeff": [complex(c).real, complex(c).imag], "exponents": list(e)}
                for c, e in self.monomials
            ],
            "weights": list(self.weights),
            "degree": self.degree,
            "epsilon": self.epsilon,
            "eta": self.eta,
            "flags": self.flags.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "Germ":
        flags = d.get("flags") or {}
        monomials = tuple(
            (complex(m["coeff"][0], m["coeff"][1]), tuple(int(e) for e in m["exponents"]))
            for m in d["monomials"]
        )
        return Germ(
            name=str(d["name"]),
            ncx=int(d["complex_vars"]),
            monomials=monomials,
            weights=tuple(int(w) for w in d["weights"]),
            degree=int(d["degree"]),
            epsilon=float(d["epsilon"]),
            eta=None if d.get("eta") is None else float(d["eta"]),
            flags=GermFlags(
                link_nonempty=flags.get("link_nonempty", "unknown"),
                pi_trivial=flags.get("pi_trivial", "unknown"),
            ),
        )


def eval_germ(germ: Germ, x: np.ndarray) -> np.ndarray:
    """Realified germ value (Re f, Im f) at a realified configuration."""
    return germ.f_real(x)


def load_germ(path) -> Germ:
    with open(path, "r", encoding="utf-8") as fh:
        return Germ.from_dict(json.load(fh))


def save_germ(germ: Germ, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(germ.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


# --- standard examples -------------------------------------------------------


def power_germ(d: int, epsilon: float = 0.5, eta: Optional[float] = None) -> Germ:
    """z^d: the zero set is one point, so the link is empty; the fiber is
    d isolated points, connected only for d = 1."""
    return Germ(
        name=f"z^{d}",
        ncx=1,
        monomials=((1.0 + 0.0j, (d,)),),
        weights=(1,),
        degree=d,
        epsilon=epsilon,
        eta=eta,
        flags=GermFlags(link_nonempty="no", pi_trivial="yes" if d == 1 else "no"),
    )


def brieskorn_germ(a: int, b: int, epsilon: float = 0.5, eta: Optional[float] = None) -> Germ:
    """z^a + w^b with the canonical weights; isolated singularity at 0,
    torus-knot link, connected fiber."""
    d = math.lcm(a, b)
    return Germ(
        name=f"z^{a}+w^{b}",
        ncx=2,
        monomials=((1.0 + 0.0j, (a, 0)), (1.0 + 0.0j, (0, b))),
        weights=(d // a, d // b),
        degree=d,
        epsilon=epsilon,
        eta=eta,
        flags=GermFlags(link_nonempty="yes", pi_trivial="yes"),
    )


def product_germ(epsilon: float = 0.5, eta: Optional[float] = None) -> Germ:
    """z*w: normal crossing; the zero set is two lines, the fiber an annulus."""
    return Germ(
        name="z*w",
        ncx=2,
        monomials=((1.0 + 0.0j, (1, 1)),),
        weights=(1, 1),
        degree=2,
        epsilon=epsilon,
        eta=eta,
        flags=GermFlags(link_nonempty="yes", pi_trivial="yes"),
    )


# --- tube machinery ----------------------------------------------------------


def _ball_seeds(rng: np.random.Generator, k: int, n: int, radius: float) -> np.ndarray:
    dirs = rng.standard_normal((k, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    r = radius * rng.uniform(size=k) ** (1.0 / n)
    return dirs * r[:, None]


def _sphere_seeds(rng: np.random.Generator, k: int, n: int, radius: float) -> np.ndarray:
    dirs = rng.standard_normal((k, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return radius * dirs


def _germ_tube_sampler_batch(germ: Germ):
    def sample(rng: np.random.Generator, k: int) -> np.ndarray:
        out = np.empty((k, germ.n), dtype=float)
        have = 0
        for _ in range(50):
            want = k - have
            phis = rng.uniform(0.0, 2.0 * math.pi, want)
            targets = germ.eta * np.stack([np.cos(phis), np.sin(phis)], axis=1)
            seeds = _ball_seeds(rng, want, germ.n, germ.epsilon)
            # near machine precision: exact lifts inherit any radial offset
            # of the start for the whole path, so 1e-12 is not enough here
            xs, ok = newton_project(germ.f_real, germ.jac_real, seeds, targets, tol=1e-14)
            ok &= np.linalg.norm(xs, axis=1) <= germ.epsilon + TUBE_TOL
            took = int(np.sum(ok))
            out[have : have + took] = xs[ok]
            have += took
            if have == k:
                return out
        raise TooFewPoints(f"could only place {have}/{k} start points on the tube")

    return sample


def tube_fibration(germ: Germ) -> WorkMap:
    """Work map of the germ restricted over its radius-eta value circle."""
    batch = _germ_tube_sampler_batch(germ)
    return WorkMap(
        n=germ.n,
        p=2,
        f=germ.f_real,
        jac=germ.jac_real,
        eta=germ.eta,
        name=germ.name,
        germ=germ,
        sampler=lambda rng: batch(rng, 1)[0],
        sampler_batch=batch,
        flags=germ.flags.to_dict(),
    )


@dataclass(frozen=True)
class TubePoint:
    """A configuration on the tube together with its cached value."""

    x: np.ndarray
    value: np.ndarray


def tube_point(germ: Germ, x: np.ndarray) -> TubePoint:
    x = np.asarray(x, dtype=float)
    v = germ.f_real(x)
    if abs(float(np.linalg.norm(v)) - germ.eta) > TUBE_TOL:
        raise ValueError("point does not sit on the tube")
    if float(np.linalg.norm(x)) > germ.epsilon + TUBE_TOL:
        raise ValueError("point leaves the ball")
    return TubePoint(x=x, value=v)


def polish_to_tube(germ: Germ, x: np.ndarray, tol: float = 1e-6) -> TubePoint:
    """Newton-project a nearly-on-tube configuration onto the exact fiber
    through its current angle. Accepts starts within tol of the tube."""
    x = np.asarray(x, dtype=float)
    v = germ.f_real(x)
    nv = float(np.linalg.norm(v))
    if abs(nv - germ.eta) > tol:
        raise ValueError(f"start is {abs(nv - germ.eta):.3e} off the tube (tol {tol:.0e})")
    target = germ.eta * normalize(v)
    xs, ok = newton_project(germ.f_real, germ.jac_real, x[None, :], target[None, :], tol=1e-14)
    if not ok[0]:
        raise ValueError("could not polish the start onto the tube")
    return tube_point(germ, xs[0])


def circle_action_lift(germ: Germ, x0: np.ndarray, dphi: float) -> CircleActionLift:
    """Exact lift of the constant-speed value arc sweeping dphi radians."""
    x0 = np.asarray(x0, dtype=float)
    v = germ.f_real(x0)
    if abs(float(np.linalg.norm(v)) - germ.eta) > 1e-6 * max(1.0, germ.eta):
        raise ValueError("lift start must sit on the tube")
    return CircleActionLift(germ=germ, start=x0, dphi=float(dphi))


# --- fiber and link sampling -------------------------------------------------


def _union_find_labels(n_points: int, pairs) -> np.ndarray:
    parent = np.arange(n_points)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    roots = np.fromiter((find(i) for i in range(n_points)), dtype=int, count=n_points)
    labels = np.empty(n_points, dtype=int)
    seen: dict[int, int] = {}
    for i, r in enumerate(roots):
        labels[i] = seen.setdefault(int(r), len(seen))
    return labels


@dataclass(frozen=True)
class FiberSample:
    """Converged Newton projections onto one fiber, split into components."""

    workmap_name: str
    base_point: np.ndarray
    angle: Optional[float]
    points: np.ndarray
    labels: np.ndarray
    n_components: int
    radius: float
    n_seeds: int
    seed: int

    @property
    def n_converged(self) -> int:
        return self.points.shape[0]

    def component_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_components)


def _cluster(points: np.ndarray) -> tuple[np.ndarray, int, float]:
    # Radius keys off the sparsest local density (the largest nearest
    # neighbor gap), not the median: on a continuous fiber the largest
    # sampling void grows like log(n) times the typical gap and a
    # median-based radius falsely fragments it. Point-like fibers have
    # near-duplicate samples, so max-NN stays many orders below the
    # spacing between distinct roots and never over-merges them.
    tree = cKDTree(points)
    nn = tree.query(points, k=2)[0][:, 1]
    radius = max(3.0 * float(nn.max()), RADIUS_FLOOR)
    pairs = tree.query_pairs(radius)
    labels = _union_find_labels(points.shape[0], pairs)
    return labels, int(labels.max()) + 1, radius


def sample_workmap_fiber(
    wm: WorkMap,
    base_point: np.ndarray,
    n_seeds: int = 1500,
    seed: int = 0,
    seed_radius: Optional[float] = None,
    max_norm: Optional[float] = None,
    angle: Optional[float] = None,
) -> FiberSample:
    """Sample the fiber of a work map over one base value.

    Uniform seeds in a ball are Newton-projected onto {f(x) = base};
    non-converged and out-of-ball seeds are dropped. Components come
    from a proximity graph with radius 3x the largest neighbor gap.
    """
    if n_seeds < 100:
        raise ValueError("need at least 100 seeds for a meaningful fiber sample")
    base_point = np.asarray(base_point, dtype=float)
    rng = np.random.default_rng(seed)
    if seed_radius is None:
        seed_radius = 1.0
    seeds = _ball_seeds(rng, n_seeds, wm.n, seed_radius)
    targets = np.broadcast_to(base_point, (n_seeds, wm.p)).copy()
    xs, ok = newton_project(wm.f, wm.jac, seeds, targets, tol=1e-12)
    if np.any(ok):
        ok[ok] &= np.linalg.norm(
            np.atleast_2d(wm.f(xs[ok])) - targets[ok], axis=1
        ) <= FIBER_TOL
    if max_norm is not None:
        ok &= np.linalg.norm(xs, axis=1) <= max_norm + TUBE_TOL
    points = xs[ok]
    if points.shape[0] < 20:
        raise TooFewPoints(
            f"only {points.shape[0]} of {n_seeds} seeds converged onto the fiber"
        )
    labels, n_comp, radius = _cluster(points)
    return FiberSample(
        workmap_name=wm.name,
        base_point=base_point,
        angle=angle,
        points=points,
        labels=labels,
        n_components=n_comp,
        radius=radius,
        n_seeds=n_seeds,
        seed=seed,
    )


def sample_fiber(germ: Germ, phi: float = 0.0, n_seeds: int = 1500, seed: int = 0) -> FiberSample:
    """Sample the germ fiber over eta * exp(i phi) inside the epsilon ball."""
    base = germ.eta * np.array([math.cos(phi), math.sin(phi)])
    return sample_workmap_fiber(
        tube_fibration(germ),
        base,
        n_seeds=n_seeds,
        seed=seed,
        seed_radius=germ.epsilon,
        max_norm=germ.epsilon,
        angle=float(phi),
    )


@dataclass(frozen=True)
class LinkSample:
    """Converged samples of the zero set on the epsilon sphere."""

    germ_name: str
    points: np.ndarray
    evidence: str  # "yes" if any point converged, else "no"
    n_seeds: int
    seed: int


def sample_link(germ: Germ, n_seeds: int = 1000, seed: int = 0) -> LinkSample:
    """Newton-project sphere seeds onto {f = 0, ||x|| = epsilon}.

    The sampler is evidence, not proof: convergence anywhere certifies a
    nonempty link, an empty result merely suggests emptiness.
    """
    if n_seeds < 100:
        raise ValueError("need at least 100 seeds for link evidence")
    rng = np.random.default_rng(seed)
    seeds = _sphere_seeds(rng, n_seeds, germ.n, germ.epsilon)
    eps2 = germ.epsilon**2

    def f(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        vals = germ.f_real(x)
        sphere = (np.sum(x * x, axis=1) - eps2)[:, None]
        return np.concatenate([vals, sphere], axis=1)

    def jac(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        Jf = germ.jac_real(x)
        Js = (2.0 * x)[:, None, :]
        return np.concatenate([Jf, Js], axis=1)

    targets = np.zeros((n_seeds, 3))
    xs, ok = newton_project(f, jac, seeds, targets, tol=1e-12)
    if np.any(ok):
        ok[ok] &= np.linalg.norm(f(xs[ok]), axis=1) <= FIBER_TOL
    points = xs[ok]
    return LinkSample(
        germ_name=germ.name,
        points=points,
        evidence="yes" if points.shape[0] > 0 else "no",
        n_seeds=n_seeds,
        seed=seed,
    )


# --- monodromy ----------------------------------------------------------------


def monodromy_components(germ: Germ, fiber: FiberSample) -> np.ndarray:
    """Transport one representative per component around the full value
    circle and return the induced permutation of component labels."""
    tree = cKDTree(fiber.points)
    perm = np.full(fiber.n_components, -1, dtype=int)
    for comp in range(fiber.n_components):
        rep = fiber.points[int(np.argmax(fiber.labels == comp))]
        end = circle_action_lift(germ, rep, 2.0 * math.pi).at(1.0)
        hits = tree.query_ball_point(end, fiber.radius)
        hit_labels = {int(fiber.labels[h]) for h in hits}
        if len(hit_labels) != 1:
            raise AmbiguousAssignment(
                f"loop endpoint of component {comp} lands near {sorted(hit_labels)}"
            )
        perm[comp] = hit_labels.pop()
    if sorted(perm.tolist()) != list(range(fiber.n_components)):
        raise AmbiguousAssignment(f"induced map {perm.tolist()} is not a permutation")
    return perm


def permutation_cycles(perm: np.ndarray) -> list[list[int]]:
    perm = np.asarray(perm, dtype=int)
    seen = np.zeros(perm.shape[0], dtype=bool)
    cycles = []
    for start in range(perm.shape[0]):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        nxt = int(perm[start])
        while nxt != start:
            cyc.append(nxt)
            seen[nxt] = True
            nxt = int(perm[nxt])
        cycles.append(cyc)
    return cycles


# --- regularity probes ---------------------------------------------------------


def regularity_sigmas(wm: WorkMap, x: np.ndarray) -> tuple[float, float]:
    """Smallest singular values of Df and of Df stacked with the radial
    gradient, at one configuration."""
    x = np.asarray(x, dtype=float)
    J = np.asarray(wm.jac(x), dtype=float)
    pair = np.concatenate([J, (2.0 * x)[None, :]], axis=0)
    s_map = float(np.linalg.svd(J, compute_uv=False)[-1])
    s_pair = float(np.linalg.svd(pair, compute_uv=False)[-1])
    return s_map, s_pair


@dataclass(frozen=True)
class RegularityProbe:
    """Sampled minima of the two transversality proxies over the tube.

    Heuristic only: a pass says no singular behavior was seen at the
    sampled points, not that none exists.
    """

    workmap_name: str
    n_samples: int
    min_sigma_map: float
    min_sigma_pair: float
    threshold: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "workmap": self.workmap_name,
            "samples": self.n_samples,
            "min_sigma_map": self.min_sigma_map,
            "min_sigma_pair": self.min_sigma_pair,
            "threshold": self.threshold,
            "verdict": self.verdict,
        }


def regularity_probe(germ: Germ, n_samples: int = 2000, seed: int = 0) -> RegularityProbe:
    """Scan tube samples for rank degeneration of f and of (f, ||x||^2)."""
    if n_samples < 1000:
        raise ValueError("probe needs at least 1000 samples to mean anything")
    rng = np.random.default_rng(seed)
    eta2 = germ.eta**2

    def g(x: np.ndarray) -> np.ndarray:
        v = germ.f_real(np.atleast_2d(x))
        return (np.sum(v * v, axis=1) - eta2)[:, None]

    def gjac(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        v = germ.f_real(x)
        J = germ.jac_real(x)
        return 2.0 * np.einsum("kp,kpn->kn", v, J)[:, None, :]

    pts = np.empty((n_samples, germ.n), dtype=float)
    have = 0
    for _ in range(50):
        want = n_samples - have
        seeds = _ball_seeds(rng, 2 * want, germ.n, germ.epsilon)
        xs, ok = newton_project(g, gjac, seeds, np.zeros((2 * want, 1)), tol=1e-12)
        ok &= np.linalg.norm(xs, axis=1) <= germ.epsilon + TUBE_TOL
        got = xs[ok][:want]
        pts[have : have + got.shape[0]] = got
        have += got.shape[0]
        if have == n_samples:
            break
    if have < n_samples:
        raise TooFewPoints(f"only {have}/{n_samples} tube samples converged")

    J = germ.jac_real(pts)                          # (k, 2, n)
    pair = np.concatenate([J, (2.0 * pts)[:, None, :]], axis=1)
    s_map = np.linalg.svd(J, compute_uv=False)[:, -1]
    s_pair = np.linalg.svd(pair, compute_uv=False)[:, -1]
    min_map = float(s_map.min())
    min_pair = float(s_pair.min())
    verdict = "probably regular" if min(min_map, min_pair) > PROBE_THRESHOLD else "suspect"
    return RegularityProbe(
        workmap_name=germ.name,
        n_samples=n_samples,
        min_sigma_map=min_map,
        min_sigma_pair=min_pair,
        threshold=PROBE_THRESHOLD,
        verdict=verdict,
    )


# --- the Hopf work map ----------------------------------------------------------


def _hopf_f(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    x1, x2, x3, x4 = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
    return np.stack(
        [
            2.0 * (x1 * x3 + x2 * x4),
            2.0 * (x2 * x3 - x1 * x4),
            x1 * x1 + x2 * x2 - x3 * x3 - x4 * x4,
        ],
        axis=-1,
    )


def _hopf_jac(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    x1, x2, x3, x4 = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
    J = np.empty(x.shape[:-1] + (3, 4), dtype=float)
    J[..., 0, 0] = 2.0 * x3
    J[..., 0, 1] = 2.0 * x4
    J[..., 0, 2] = 2.0 * x1
    J[..., 0, 3] = 2.0 * x2
    J[..., 1, 0] = -2.0 * x4
    J[..., 1, 1] = 2.0 * x3
    J[..., 1, 2] = 2.0 * x2
    J[..., 1, 3] = -2.0 * x1
    J[..., 2, 0] = 2.0 * x1
    J[..., 2, 1] = 2.0 * x2
    J[..., 2, 2] = -2.0 * x3
    J[..., 2, 3] = -2.0 * x4
    return J


HOPF_ETA = 0.01  # tube = the 3-sphere of radius 0.1, since ||f(x)|| = ||x||^2


def hopf_germ(eta: float = HOPF_ETA) -> WorkMap:
    """Quadratic sphere map (z, w) -> (2 z conj(w), |z|^2 - |w|^2).

    Target dimension three; the zero set is the origin alone, so the
    link is empty, and the fiber is a circle, so the relevant homotopy
    group is not trivial. Both facts are declared on the work map.
    """

    def sampler_batch(rng: np.random.Generator, k: int) -> np.ndarray:
        return _sphere_seeds(rng, k, 4, math.sqrt(eta))

    return WorkMap(
        n=4,
        p=3,
        f=_hopf_f,
        jac=_hopf_jac,
        eta=eta,
        name="hopf",
        sampler=lambda rng: sampler_batch(rng, 1)[0],
        sampler_batch=sampler_batch,
        flags={"link_nonempty": "no", "pi_trivial": "no"},
    )


# --- deserialization hooks -------------------------------------------------------


def _parse_circle_action_lift(d: dict) -> CircleActionLift:
    return CircleActionLift(
        germ=Germ.from_dict(d["germ"]),
        start=np.asarray(d["start"], dtype=float),
        dphi=None if d.get("dphi") is None else float(d["dphi"]),
        base=path_from_dict(d["base"]) if d.get("base") else None,
    )


NODE_PARSERS["circle_action_lift"] = _parse_circle_action_lift
WORKMAP_PARSERS["germ"] = lambda d: tube_fibration(Germ.from_dict(d["germ"]))
NAMED_WORKMAPS["hopf"] = hopf_germ
