"""Certificates and statistical contract checks for planners.

Two complementary verdict sources live here. `certify_tc` and
`certify_sec` turn declared or sampled topological facts into interval
certificates for the navigation complexity of a work map restricted
over its task sphere. `run_contract_suite` hammers a planner with
randomized queries and reports every contract violation it can detect;
a planner that survives with k regions is itself an upper-bound witness
that must agree with the certificate.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import LiftFailure, Uncovered, WrongCodomain
from .fibration import TaskingPlanner, WorkMap
from .geometry import NORM_TOL, Scaled, normalize
from .milnor import Germ
from .sphere_planner import SpherePlanner

# --- certificates -----------------------------------------------------------


@dataclass(frozen=True)
class CertifyInputs:
    """Echo of the facts a certificate was computed from."""

    p: int
    link_nonempty: str = "unknown"
    pi_trivial: str = "unknown"
    fiber_components: Optional[int] = None
    provenance: str = "declared"
    name: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "target_dim": self.p,
            "link_nonempty": self.link_nonempty,
            "pi_trivial": self.pi_trivial,
            "fiber_components": self.fiber_components,
            "provenance": self.provenance,
        }


def _as_inputs(source, **overrides) -> CertifyInputs:
    if isinstance(source, CertifyInputs):
        base = source.__dict__ | overrides
        return CertifyInputs(**base)
    if isinstance(source, Germ):
        d = {
            "p": 2,
            "link_nonempty": source.flags.link_nonempty,
            "pi_trivial": source.flags.pi_trivial,
            "name": source.name,
        }
    elif isinstance(source, WorkMap):
        flags = source.flags or {}
        d = {
            "p": source.p,
            "link_nonempty": flags.get("link_nonempty", "unknown"),
            "pi_trivial": flags.get("pi_trivial", "unknown"),
            "name": source.name,
        }
    else:
        raise TypeError(f"cannot certify a {type(source).__name__}")
    d.update(overrides)
    return CertifyInputs(**d)


@dataclass(frozen=True)
class Certificate:
    """Interval certificate for a complexity quantity.

    exact is set only when the hypotheses pin the value; otherwise the
    truth lies in [lower, upper]. tags name the rules that fired,
    assumptions name the hypotheses taken on trust.
    """

    quantity: str
    lower: int
    upper: int
    exact: Optional[int]
    tags: tuple[str, ...]
    assumptions: tuple[str, ...]
    inputs: dict
    section_exists: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "lower": self.lower,
            "upper": self.upper,
            "exact": self.exact,
            "section_exists": self.section_exists,
            "tags": list(self.tags),
            "assumptions": list(self.assumptions),
            "inputs": self.inputs,
        }


def certify_tc(source, **overrides) -> Certificate:
    """Navigation-complexity certificate for a tube planner.

    The base sphere S^{p-1} forces the lower bound 2; the pullback
    planner over it forces the upper bound 2 (p even) or 3 (p odd).
    For odd p the value settles at 3 when the link is nonempty or when
    the relevant homotopy group of the fiber is trivial.
    """
    ci = _as_inputs(source, **overrides)
    if ci.p < 2:
        raise ValueError("need a target dimension of at least 2")
    tags = ["lower-bound-from-base-sphere-category"]
    assumptions: list[str] = []
    lower = 2
    if ci.p % 2 == 0:
        upper = 2
        exact = 2
        tags += ["upper-bound-from-pullback-planner", "even-target-odd-base-sphere"]
    else:
        upper = 3
        tags.append("upper-bound-from-pullback-planner")
        if ci.link_nonempty == "yes":
            exact = 3
            tags.append("nonempty-link-forces-maximum")
            assumptions.append("isolated-singularity")
        elif ci.pi_trivial == "yes":
            exact = 3
            tags.append("trivial-fiber-homotopy-forces-maximum")
            assumptions.append("link-cells-dimension-bound")
        else:
            exact = None
            tags.append("parity-bounds-only")
    return Certificate(
        quantity="TC",
        lower=lower,
        upper=upper,
        exact=exact,
        tags=tuple(tags),
        assumptions=tuple(assumptions),
        inputs=ci.to_dict(),
    )


def certify_sec(source, fiber_components: Optional[int] = None, **overrides) -> Certificate:
    """Section-number certificate for a plane-valued tube map.

    A disconnected fiber rules out any global section (value 2); a
    connected fiber yields one (value 1). Component counts usually come
    from `sample_fiber`, so the provenance default is 'sampled'.
    """
    ci = _as_inputs(source, **overrides)
    if ci.p != 2:
        raise WrongCodomain(f"section certificates need a plane target, got p = {ci.p}")
    comps = fiber_components if fiber_components is not None else ci.fiber_components
    if comps is None:
        raise ValueError("need a fiber component count; run sample_fiber first")
    if comps < 1:
        raise ValueError("component count must be positive")
    if ci.fiber_components != comps or ci.provenance == "declared":
        ci = CertifyInputs(
            **(ci.__dict__ | {"fiber_components": int(comps), "provenance": "sampled"})
        )
    assumptions = ("component-count-is-exhaustive",) if ci.provenance == "sampled" else ()
    if comps >= 2:
        return Certificate(
            quantity="sec",
            lower=2,
            upper=2,
            exact=2,
            section_exists="no",
            tags=("fiber-disconnected-blocks-sections",),
            assumptions=assumptions,
            inputs=ci.to_dict(),
        )
    return Certificate(
        quantity="sec",
        lower=1,
        upper=1,
        exact=1,
        section_exists="yes",
        tags=("fiber-connected-global-section",),
        assumptions=assumptions,
        inputs=ci.to_dict(),
    )


def planner_upper_bound_agrees(cert: Certificate, planner) -> bool:
    """Cross-check: a surviving k-region planner witnesses TC <= k, which
    must coincide with the certificate's upper bound on coded examples."""
    return len(planner.regions) == cert.upper


# --- randomized contract suite ------------------------------------------------


@dataclass
class VerificationReport:
    """Outcome of one randomized planner check run."""

    planner: str
    queries: int
    regions: int
    seed: int
    knots: int
    deep_queries: int
    coverage_failures: int = 0
    dispatch_mismatches: int = 0
    max_endpoint_error: float = 0.0
    max_projection_residual: Optional[float] = None
    max_surface_deviation: Optional[float] = None
    lift_failures: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return (
            self.coverage_failures == 0
            and self.dispatch_mismatches == 0
            and not self.failures
            and not self.lift_failures
        )

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "planner": self.planner,
            "queries": self.queries,
            "regions": self.regions,
            "seed": self.seed,
            "knots": self.knots,
            "deep_queries": self.deep_queries,
            "coverage_failures": self.coverage_failures,
            "dispatch_mismatches": self.dispatch_mismatches,
            "max_endpoint_error": self.max_endpoint_error,
            "max_projection_residual": self.max_projection_residual,
            "max_surface_deviation": self.max_surface_deviation,
            "lift_failures": self.lift_failures,
            "failures": self.failures,
            "passed": self.passed,
        }
        if include_timing:
            d["wall_time"] = self.wall_time
        return d


def _planner_id(planner) -> str:
    if isinstance(planner, SpherePlanner):
        return f"sphere(m={planner.m}, delta={planner.delta})"
    if isinstance(planner, TaskingPlanner):
        kind = getattr(planner.oracle, "kind", "?")
        return f"pullback({planner.workmap.name}, oracle={kind}, delta={planner.delta})"
    return type(planner).__name__


def _sphere_queries(planner: SpherePlanner, rng, k: int):
    starts = normalize(rng.standard_normal((k, planner.m + 1)))
    goals = normalize(rng.standard_normal((k, planner.m + 1)))
    return starts, goals


def _tasking_queries(planner: TaskingPlanner, rng, k: int):
    starts = planner.workmap.sample(rng, k)
    goals = planner.eta * normalize(rng.standard_normal((k, planner.workmap.p)))
    return starts, goals


def run_contract_suite(
    planner,
    n_queries: int,
    seed: int = 0,
    knots: int = 256,
    deep: Optional[int] = None,
    queries: Optional[tuple[np.ndarray, np.ndarray]] = None,
    endpoint_tol: Optional[float] = None,
) -> VerificationReport:
    """Randomized planner check: coverage, minimal-index dispatch,
    endpoint contracts, and (on the first `deep` queries) dense on-sphere
    or projection checks along the whole path.

    Reports are deterministic functions of (planner, n_queries, seed)
    modulo wall time; failures carry the query index so a run can be
    replayed.
    """
    t_start = time.perf_counter()
    rng = np.random.default_rng(seed)
    is_sphere = isinstance(planner, SpherePlanner)
    if queries is not None:
        starts, goals = np.asarray(queries[0], float), np.asarray(queries[1], float)
        n_queries = starts.shape[0]
    elif is_sphere:
        starts, goals = _sphere_queries(planner, rng, n_queries)
    else:
        starts, goals = _tasking_queries(planner, rng, n_queries)
    deep_count = n_queries if deep is None else min(deep, n_queries)
    ts = np.linspace(0.0, 1.0, knots)

    if endpoint_tol is None:
        endpoint_tol = NORM_TOL if is_sphere else planner.oracle.lift_tol
    proj_tol = None if is_sphere else planner.oracle.lift_tol

    report = VerificationReport(
        planner=_planner_id(planner),
        queries=n_queries,
        regions=len(planner.regions),
        seed=seed,
        knots=knots,
        deep_queries=deep_count,
    )
    max_proj = 0.0
    max_surface = 0.0
    any_deep = False

    for i in range(n_queries):
        a, b = starts[i], goals[i]
        try:
            idx, path = planner.plan(a, b)
        except Uncovered as ex:
            report.coverage_failures += 1
            report.failures.append({"index": i, "kind": "uncovered", "detail": str(ex)})
            continue
        except LiftFailure as ex:
            report.lift_failures.append(
                {"index": i, "t_star": ex.t_star, "message": str(ex)}
            )
            continue

        # independent minimal-index scan over the base regions
        if is_sphere:
            pair = (normalize(a), normalize(b))
            delta = planner.delta
            base_regions = planner.regions
        else:
            pair = planner._base_pair(a, b)
            delta = planner.base.delta
            base_regions = planner.base.regions
        scan = next(
            (r.index for r in base_regions if r.member(pair[0], pair[1], delta)), None
        )
        if scan != idx:
            report.dispatch_mismatches += 1
            report.failures.append(
                {"index": i, "kind": "dispatch", "detail": f"planner {idx}, scan {scan}"}
            )

        if is_sphere:
            err = max(
                float(np.linalg.norm(path.at(0.0) - a)),
                float(np.linalg.norm(path.at(1.0) - b)),
            )
        else:
            err = max(
                float(np.linalg.norm(path.at(0.0) - a)),
                float(np.linalg.norm(planner.workmap.f(path.at(1.0)) - b)),
            )
        report.max_endpoint_error = max(report.max_endpoint_error, err)
        if err > endpoint_tol:
            report.failures.append(
                {"index": i, "kind": "endpoint", "detail": f"error {err:.3e}"}
            )

        if i < deep_count:
            any_deep = True
            pts = path.sample(ts)
            if is_sphere:
                dev = float(np.abs(np.linalg.norm(pts, axis=1) - 1.0).max())
                max_surface = max(max_surface, dev)
                if dev > NORM_TOL:
                    report.failures.append(
                        {"index": i, "kind": "off-sphere", "detail": f"deviation {dev:.3e}"}
                    )
            else:
                vals = planner.workmap.f(pts)
                region = planner.base.regions[idx - 1]
                gamma = Scaled(region.build(pair[0], pair[1], delta), planner.eta)
                proj = float(np.linalg.norm(vals - gamma.sample(ts), axis=1).max())
                dev = float(np.abs(np.linalg.norm(vals, axis=1) - planner.eta).max())
                max_proj = max(max_proj, proj)
                max_surface = max(max_surface, dev)
                if proj > proj_tol:
                    report.failures.append(
                        {"index": i, "kind": "projection", "detail": f"residual {proj:.3e}"}
                    )

    if any_deep:
        report.max_surface_deviation = max_surface
        if not is_sphere:
            report.max_projection_residual = max_proj
    report.wall_time = time.perf_counter() - t_start
    return report


# --- continuity probe ----------------------------------------------------------


def _perturb_on_sphere(rng, t: np.ndarray, scale: float) -> np.ndarray:
    xi = rng.standard_normal(t.shape[0])
    xi -= (xi @ t) * t
    xi = scale * xi / np.linalg.norm(xi)
    return normalize(t + xi)


def continuity_probe(
    planner,
    region_index: int,
    scales: Sequence[float] = (1e-3, 1e-4, 1e-5),
    n_pairs: int = 64,
    seed: int = 0,
    knots: int = 256,
) -> list[dict]:
    """Max pointwise path deviation under query perturbations of
    shrinking scale, within one region.

    Base queries sit well inside the region (margin at least
    delta + delta/2 plus slack for the perturbation) and are shared
    across scales, so the returned max deviations of a continuous local
    rule decrease monotonically along `scales`.
    """
    rng = np.random.default_rng(seed)
    ts = np.linspace(0.0, 1.0, knots)
    scales = sorted((float(s) for s in scales), reverse=True)
    is_sphere = isinstance(planner, SpherePlanner)
    base = planner if is_sphere else planner.base
    region = base.regions[region_index - 1]
    # margin head-room: interior by delta/2 plus room for the perturbation
    need = 1.5 * base.delta + 4.0 * scales[0]

    queries = []
    attempts = 0
    while len(queries) < n_pairs:
        attempts += 1
        if attempts > 200 * n_pairs:
            raise RuntimeError(f"cannot place queries inside region {region_index}")
        if is_sphere:
            t1 = normalize(rng.standard_normal(base.m + 1))
            t2 = normalize(rng.standard_normal(base.m + 1))
            if region.margin(t1, t2) < need:
                continue
            queries.append((t1, t2, rng.integers(1 << 31)))
        else:
            e = planner.workmap.sampler(rng)
            w = planner.eta * normalize(rng.standard_normal(planner.workmap.p))
            th1, th2 = planner._base_pair(e, w)
            if region.margin(th1, th2) < need:
                continue
            queries.append((e, w, rng.integers(1 << 31)))

    rows = []
    for scale in scales:
        devs = np.empty(len(queries))
        for qi, (a, b, sub) in enumerate(queries):
            sub_rng = np.random.default_rng(sub)
            if is_sphere:
                a2 = _perturb_on_sphere(sub_rng, a, scale)
                b2 = _perturb_on_sphere(sub_rng, b, scale)
                p1 = region.build(a, b, base.delta)
                p2 = region.build(a2, b2, base.delta)
            else:
                # perturb the goal only; the start is pinned to a fiber
                th1, th2 = planner._base_pair(a, b)
                th2b = _perturb_on_sphere(sub_rng, th2, scale)
                gamma1 = Scaled(region.build(th1, th2, base.delta), planner.eta)
                gamma2 = Scaled(region.build(th1, th2b, base.delta), planner.eta)
                p1 = planner.oracle.lift(planner.workmap, a, gamma1)
                p2 = planner.oracle.lift(planner.workmap, a, gamma2)
            devs[qi] = float(np.linalg.norm(p1.sample(ts) - p2.sample(ts), axis=1).max())
        rows.append(
            {
                "scale": scale,
                "pairs": len(queries),
                "max_deviation": float(devs.max()),
                "mean_deviation": float(devs.mean()),
                "lipschitz_ratio": float(devs.max() / scale),
            }
        )
    return rows


def probe_is_monotone(rows: list[dict]) -> bool:
    """True when max deviation strictly decreases as the scale shrinks."""
    devs = [r["max_deviation"] for r in rows]
    return all(b < a for a, b in zip(devs, devs[1:]))
