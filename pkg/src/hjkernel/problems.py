"""Benchmark problem catalogue, exact solutions and the convergence harness.

Twelve built-in problems cover linear and nonlinear, convex and non-convex
Hamiltonians on periodic, inflow and outflow boundaries, plus perturbed
meshes and two boundary-embedded geometries (disk and annulus).  Problems
with smooth-time exact solutions carry them analytically or through a
characteristics solve; one problem uses a fine-grid self-reference.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import hamiltonian as ham
from . import solver as _solver
from .errors import ShapeError
from .grid import TensorGrid2D, embed_domain_2d, make_grid_1d


@dataclass(frozen=True)
class ProblemSpec:
    """One benchmark: geometry, Hamiltonian, data and truth source."""

    name: str
    dimension: int
    bc: str  # periodic | dirichlet | outflow | embedded
    domain: tuple  # (a, b) or ((ax, bx), (ay, by))
    t_final: float
    make_model: object
    initial: object
    mapping: object = None  # None | "perturbed" | "geometric" | callable
    exact: object = None  # callable(x[, y], t)
    reference_recipe: dict | None = None
    dirichlet: tuple | None = None  # (g_a(t), g_b(t)) for 1-D inflow data
    make_domain: object = None  # embedded: n -> EmbeddedDomain2D
    alt_initials: tuple = ()
    notes: str = ""

    def __post_init__(self):
        if self.exact is not None and self.reference_recipe is not None:
            raise ValueError("exact and reference_recipe are mutually exclusive")


@dataclass
class ConvergenceReport:
    """Errors per resolution and the orders between successive rows."""

    problem: str
    order: int
    cfl: float
    resolutions: list
    errors: list

    @property
    def orders(self):
        out = [float("nan")]
        for i in range(1, len(self.errors)):
            e0, e1 = self.errors[i - 1], self.errors[i]
            out.append(np.log2(e0 / e1) if e0 > 0 and e1 > 0 else float("inf"))
        return out

    def format_table(self):
        lines = [f"{'N':>6}  {'error':>12}  {'order':>7}"]
        for n, e, o in zip(self.resolutions, self.errors, self.orders):
            otxt = "--" if np.isnan(o) else f"{o:7.3f}"
            lines.append(f"{n:>6}  {e:12.4e}  {otxt:>7}")
        return "\n".join(lines)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("N,error,order\n")
            for n, e, o in zip(self.resolutions, self.errors, self.orders):
                otxt = "" if np.isnan(o) else f"{o:.6f}"
                fh.write(f"{n},{e:.10e},{otxt}\n")

    def to_json_dict(self):
        return {
            "problem": self.problem,
            "order": self.order,
            "cfl": self.cfl,
            "resolutions": list(self.resolutions),
            "errors": [float(e) for e in self.errors],
            "orders": [None if np.isnan(o) else float(o) for o in self.orders],
        }


# -- initial data ---------------------------------------------------------------


def _phi_smooth_1d(x):
    return np.sin(2.0 * np.pi * x)


def _ramp(s, lo, hi):
    return np.clip((s - lo) / (hi - lo), 0.0, 1.0)


def phi_piecewise_1d(x):
    """Continuous trapezoid: 0, ramp, plateau 2 on [0.4,0.6], ramp, 0."""
    x = np.asarray(x, dtype=float)
    up = 40.0 / 3.0 * (x - 0.25)
    down = 40.0 / 3.0 * (0.75 - x)
    out = np.where((x > 0.25) & (x < 0.4), up, 0.0)
    out = np.where((x >= 0.4) & (x <= 0.6), 2.0, out)
    out = np.where((x > 0.6) & (x < 0.75), down, out)
    return out


def phi_pyramid_2d(x, y):
    """Tensor-product trapezoid: plateau 2 on [0.4,0.6]^2, linear skirts."""
    gx = np.minimum(_ramp(x, 0.2, 0.4), 1.0 - _ramp(x, 0.6, 0.8))
    gy = np.minimum(_ramp(y, 0.2, 0.4), 1.0 - _ramp(y, 0.6, 0.8))
    return 2.0 * gx * gy


def _phi_cos_diag(x, y):
    return -np.cos(np.pi * (x + y) / 2.0)


# -- exact solutions ------------------------------------------------------------


def burgers_characteristic_p(x, t, tol=1e-13, max_iter=100):
    """Slope p solving p = pi*sin(pi*(x - t*(p+1))) by damped Newton.

    Valid while characteristics are single-valued (t < 1/pi^2 for this
    data); vectorized over x.
    """
    x = np.asarray(x, dtype=float)
    p = np.zeros_like(x)
    for _ in range(max_iter):
        arg = np.pi * (x - t * (p + 1.0))
        f = p - np.pi * np.sin(arg)
        fp = 1.0 + t * np.pi**2 * np.cos(arg)
        step = f / fp
        pn = p - step
        # damping: halve steps that increase the residual
        for _ in range(40):
            fn = pn - np.pi * np.sin(np.pi * (x - t * (pn + 1.0)))
            bad = np.abs(fn) > np.abs(f)
            if not np.any(bad):
                break
            step = np.where(bad, 0.5 * step, step)
            pn = p - step
        p = pn
        if np.max(np.abs(f)) < tol:
            break
    return p


def burgers_exact_1d(x, t):
    """Pre-shock solution of phi_t + (phi_x+1)^2/2 = 0, phi0 = -cos(pi x)."""
    if t == 0.0:
        return -np.cos(np.pi * np.asarray(x, dtype=float))
    p = burgers_characteristic_p(x, t)
    x0 = x - t * (p + 1.0)
    return -np.cos(np.pi * x0) + 0.5 * t * (p * p - 1.0)


def linear_exact_1d(x, t):
    return np.sin(2.0 * np.pi * (x - t))


def linear_exact_2d(x, y, t):
    return _phi_cos_diag(x - t, y - t) - t


def burgers_exact_2d(x, y, t):
    return burgers_exact_1d((x + y) / 2.0, t)


def annulus_exact(x, y, t):
    return np.sqrt(x * x + y * y) - 0.5


# -- embedded geometry factories --------------------------------------------------


_EMBED_BOX = (-1.05, 1.05)


def _background(n):
    gx = make_grid_1d(_EMBED_BOX, n, "uniform")
    gy = make_grid_1d(_EMBED_BOX, n, "uniform")
    return TensorGrid2D(gx, gy)


def make_disk_domain(n):
    # min_interior=2: near-tangent chords at coarse resolutions become
    # short segments handled by the solver's one-sided fallback.
    return embed_domain_2d(
        lambda x, y: x * x + y * y < 1.0,
        lambda x, y, t: 1.0 + t,
        _background(n),
        min_interior=2,
    )


def make_annulus_domain(n):
    # The reinitialization flow moves outward: the inner circle carries
    # the distance data (reinitialization-style, the band of nodes next
    # to the interface is held at the exact distance values), the outer
    # circle is outflow (None = extrapolate).
    def boundary_value(x, y, t):
        r = np.sqrt(x * x + y * y)
        return r - 0.5 if r < 0.75 else None

    h = 2.1 / n
    return embed_domain_2d(
        lambda x, y: 0.25 < x * x + y * y < 1.0,
        boundary_value,
        _background(n),
        min_interior=2,
        pin_band=lambda x, y: np.hypot(x, y) < 0.5 + 1.01 * h,
    )


# -- catalogue --------------------------------------------------------------------


def catalogue():
    """The twelve built-in benchmark problems."""
    probs = [
        ProblemSpec(
            "linear1d", 1, "periodic", (0.0, 1.0), 1.0,
            ham.linear_1d, _phi_smooth_1d,
            exact=linear_exact_1d,
            alt_initials=(("piecewise", phi_piecewise_1d),),
            notes="advection of sin(2 pi x); piecewise variant for plots",
        ),
        ProblemSpec(
            "burgers1d", 1, "periodic", (-1.0, 1.0), 0.5 / np.pi**2,
            ham.burgers_1d, lambda x: -np.cos(np.pi * x),
            exact=burgers_exact_1d,
            notes="smooth until t=1/pi^2; run --t-final 0.35469 for the "
                  "post-shock profile",
        ),
        ProblemSpec(
            "riemann_nonconvex1d", 1, "dirichlet", (-1.0, 1.0), 1.0,
            ham.nonconvex_1d, lambda x: -2.0 * np.abs(x),
            reference_recipe={"n": 1600},
            dirichlet=(lambda t: -2.0, lambda t: -2.0),
            notes="double-well Hamiltonian, inflow value -2 at both ends",
        ),
        ProblemSpec(
            "linear2d", 2, "periodic", ((-2.0, 2.0), (-2.0, 2.0)), 2.0,
            ham.linear_2d, _phi_cos_diag,
            exact=linear_exact_2d,
            alt_initials=(("pyramid", phi_pyramid_2d),),
        ),
        ProblemSpec(
            "burgers2d", 2, "periodic", ((-2.0, 2.0), (-2.0, 2.0)),
            0.5 / np.pi**2,
            ham.burgers_2d, _phi_cos_diag,
            exact=burgers_exact_2d,
        ),
        ProblemSpec(
            "riemann_nonconvex2d", 2, "outflow", ((-1.0, 1.0), (-1.0, 1.0)),
            1.0,
            ham.riemann_2d,
            lambda x, y: np.pi * (np.abs(y) - np.abs(x)),
        ),
        ProblemSpec(
            "control2d", 2, "periodic", ((-np.pi, np.pi), (-np.pi, np.pi)),
            1.0,
            ham.control_2d, lambda x, y: np.zeros_like(x),
            notes="optimal-control cost; report sign(phi_y) as the control",
        ),
        ProblemSpec(
            "burgers2d_perturbed", 2, "periodic", ((-2.0, 2.0), (-2.0, 2.0)),
            0.5 / np.pi**2,
            ham.burgers_2d, _phi_cos_diag,
            mapping="perturbed",
            exact=burgers_exact_2d,
            notes="random-perturbation mesh, seeded jitter of 0.3 dx",
        ),
        ProblemSpec(
            "optics2d", 2, "periodic", ((0.0, 1.0), (0.0, 1.0)), 0.6,
            lambda: ham.optics_2d(+1.0),
            lambda x, y: 0.25 * (np.cos(2 * np.pi * x) - 1.0)
            * (np.cos(2 * np.pi * y) - 1.0) - 1.0,
        ),
        ProblemSpec(
            "surface2d", 2, "periodic", ((0.0, 1.0), (0.0, 1.0)), 0.9,
            lambda: ham.optics_2d(-1.0),
            lambda x, y: 1.0 - 0.25 * (np.cos(2 * np.pi * x) - 1.0)
            * (np.cos(2 * np.pi * y) - 1.0),
        ),
        ProblemSpec(
            "disk_surface2d", 2, "embedded", (_EMBED_BOX, _EMBED_BOX), 1.2,
            lambda: ham.optics_2d(-1.0),
            lambda x, y: np.sin(0.5 * np.pi * (x * x + y * y)),
            make_domain=make_disk_domain,
            notes="propagating surface on the unit disk, boundary 1+t",
        ),
        ProblemSpec(
            "annulus_reinit2d", 2, "embedded", (_EMBED_BOX, _EMBED_BOX), 1.0,
            lambda: ham.reinit_2d(
                lambda x, y: np.sign(np.sqrt(x * x + y * y) - 0.5)
            ),
            lambda x, y: np.sqrt(x * x + y * y) - 0.5,
            exact=annulus_exact,
            make_domain=make_annulus_domain,
            notes="distance reinitialization on 0.5 < r < 1; steady state",
        ),
    ]
    return probs


def get_problem(name):
    for p in catalogue():
        if p.name == name:
            return p
    raise KeyError(name)


# -- errors and convergence studies -----------------------------------------------


def error_norm(numeric, truth, mask=None):
    """Max-norm difference over the (optionally masked) nodes."""
    numeric = np.asarray(numeric, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if numeric.shape != truth.shape:
        raise ShapeError(
            f"field shapes differ: {numeric.shape} vs {truth.shape}"
        )
    diff = np.abs(numeric - truth)
    if mask is not None:
        diff = diff[mask]
    return float(diff.max()) if diff.size else 0.0


def _truth_on_grid(problem, result):
    state = result.state
    if problem.exact is None:
        return None
    if problem.dimension == 1:
        return problem.exact(result.grid.physical_nodes, state.time)
    if problem.bc == "embedded":
        xx, yy = result.grid.background.meshgrid()
    else:
        xx, yy = result.grid.meshgrid()
    return problem.exact(xx, yy, state.time)


def run_error(problem, n, order, cfl, seed=0, beta=None, lam=None,
              reference=None):
    """Run one resolution and measure its max-norm error."""
    result = _solver.run(problem, n, cfl=cfl, order=order, beta=beta,
                         lam=lam, seed=seed)
    truth = _truth_on_grid(problem, result)
    if truth is None:
        if reference is None:
            raise ValueError(f"problem {problem.name} needs a reference run")
        stride = (reference.state.field.shape[0] - 1) // n
        truth = reference.state.field[::stride]
    return error_norm(result.state.field, truth, mask=result.mask), result


def convergence_study(problem, order, cfl, resolutions, seed=0, beta=None,
                      lam=None, threads=1):
    """Errors and measured orders over a doubling resolution ladder."""
    resolutions = list(resolutions)
    if len(resolutions) < 2:
        raise ValueError("need at least two resolutions")
    for a, b in zip(resolutions[:-1], resolutions[1:]):
        if b != 2 * a:
            raise ValueError("resolutions must double")
    reference = None
    if problem.exact is None and problem.reference_recipe is not None:
        n_ref = problem.reference_recipe["n"]
        reference = _solver.run(problem, n_ref, cfl=cfl, order=order,
                                beta=beta, lam=lam, seed=seed)

    def one(n):
        err, _ = run_error(problem, n, order, cfl, seed=seed, beta=beta,
                           lam=lam, reference=reference)
        return err

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errors = list(pool.map(one, resolutions))
    else:
        errors = [one(n) for n in resolutions]
    return ConvergenceReport(problem.name, order, cfl, resolutions, errors)
