"""Semi-discrete right-hand sides, full simulation runs and diagnostics.

The semi-discrete scheme at every node is  d(phi)/dt = -Hhat(u-, u+)  with
u-, u+ the biased computational-coordinate derivatives from the kernel
operators and Hhat the local Lax-Friedrichs flux of the transformed
Hamiltonian.  Two-dimensional fields are swept line by line: the x pass
runs all rows as one batch, the y pass runs on the transposed field, so
both directions share the 1-D kernel machinery.  Embedded domains solve
each boundary-cut segment as an independent non-periodic line.
"""

from __future__ import annotations

import json
import time as _time
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, InvalidParameterError
from .grid import Grid1D, TensorGrid2D, build_grid_1d, make_grid_1d
from .hamiltonian import TransformedHamiltonian, transform, transform_2d
from .integrate import RKScheme, TimeController, select_beta, validate_beta
from .kernel import LineKernel
from .weno import WenoConfig

SPEED_FLOOR = 1e-12


@dataclass
class SolveState:
    """Field values on the grid at one instant."""

    field: np.ndarray
    time: float
    step_count: int


@dataclass
class ConservationDiag:
    """Cell-slope update residual for one explicit Euler substep."""

    phi_cell: np.ndarray
    residual: float


def conservation_check(before, after, fluxes, dt, dx_cells):
    """Verify that the update advanced the cell slopes in flux-difference form.

    ``before``/``after`` are nodal fields around one Euler substep with the
    recorded nodal fluxes; the residual is the max deviation of
    (Phi^{n+1}-Phi^n)/dt + (flux_{i+1}-flux_i)/dx_i from zero.
    """
    before = np.asarray(before, dtype=float)
    after = np.asarray(after, dtype=float)
    fluxes = np.asarray(fluxes, dtype=float)
    dx = np.asarray(dx_cells, dtype=float)
    phi_cell = np.diff(after) / dx
    lhs = (phi_cell - np.diff(before) / dx) / dt
    rhs = -np.diff(fluxes) / dx
    return ConservationDiag(phi_cell, float(np.max(np.abs(lhs - rhs))))


def _slope_range(values, widths, axis=0):
    s = np.diff(values, axis=axis) / widths
    return float(s.min()), float(s.max())


def _pad_range(rng, fraction=0.1):
    lo, hi = rng
    pad = fraction * (hi - lo)
    return lo - pad, hi + pad


class _KernelCache:
    """LineKernel instances keyed by (geometry key, alpha)."""

    def __init__(self):
        self._store = {}

    def get(self, key, alpha, factory):
        k = (key, alpha)
        lk = self._store.get(k)
        if lk is None:
            lk = factory()
            self._store[k] = lk
        return lk


class Solver1D:
    """Time stepper for one mapped 1-D line."""

    def __init__(self, grid, model, order, cfl, beta=None, lam=None,
                 config=None, bc="periodic", dirichlet=None):
        self.grid = grid
        self.model = model
        self.order = int(order)
        self.cfl = float(cfl)
        self.beta = validate_beta(
            beta if beta is not None else select_beta(order, 1), order
        )
        self.config = config or WenoConfig(lam=lam)
        if lam is not None and config is None:
            self.config = WenoConfig(lam=lam)
        self.bc = bc
        self.dirichlet = dirichlet
        self.tham = transform(model, grid)
        self.metric_max = float(grid.xi_x.max())
        self._cache = _KernelCache()
        self.last_derivatives = None
        self.conservation_residual = 0.0
        self._kernel_bc = "periodic" if bc == "periodic" else "derivative-data"

    # -- speeds and steps ------------------------------------------------------

    def wave_speed(self, phi):
        gs = getattr(self.model, "global_speed", None)
        if gs is not None:
            return float(gs if np.isscalar(gs) else gs[0])
        rng = _pad_range(_slope_range(phi, self.grid.cell_widths))
        c = self.model.speed_bound(rng, x=self.grid.physical_nodes)
        return max(c, SPEED_FLOOR)

    def spacing(self):
        if self.grid.uniform:
            return float(self.grid.cell_widths[0])
        return self.grid.delta_xi

    def _kernel(self, alpha):
        xi = self.grid.xi
        return self._cache.get(
            "line", alpha,
            lambda: LineKernel(xi, self._kernel_bc, alpha, self.order,
                               config=self.config),
        )

    def rhs(self, phi, t, alpha):
        lk = self._kernel(alpha)
        bd = lk.biased_derivatives(phi)
        self.last_derivatives = bd
        um, up = bd.minus, bd.plus
        xi_x = self.grid.xi_x
        pm = xi_x * np.minimum(um, up)
        pp = xi_x * np.maximum(um, up)
        disp = xi_x * self.model.bound_p(pm, pp, None, None,
                                         self.grid.physical_nodes, None)
        havg = self.tham.evaluate(0.5 * (um + up))
        return -(havg - 0.5 * disp * (up - um))

    def _post_stage(self, phi, t):
        if self.bc == "dirichlet" and self.dirichlet is not None:
            ga, gb = self.dirichlet
            phi[0] = ga(t)
            phi[-1] = gb(t)
        return phi

    def run(self, initial, t_final, conservation=False, max_steps=10**7):
        phi = np.asarray(initial(self.grid.physical_nodes), dtype=float)
        tc = TimeController(cfl=self.cfl, t_final=t_final)
        scheme = RKScheme.of_order(self.order)
        dt_history = []
        history = []
        step = 0
        while not tc.done and step < max_steps:
            c_x = self.wave_speed(phi)
            dt = tc.next_dt([self.spacing()], [max(c_x, SPEED_FLOOR)])
            c_xi = max(c_x, SPEED_FLOOR) * self.metric_max
            alpha = self.beta / (c_xi * dt)
            phi = self._advance(phi, tc.t, dt, alpha, scheme, conservation)
            if not np.all(np.isfinite(phi)):
                raise DivergenceError(
                    f"non-finite field at step {step}", step=step, time=tc.t,
                    history=history[-10:],
                )
            tc.advance()
            dt_history.append(dt)
            history.append(float(np.max(np.abs(phi))))
            step += 1
        return SolveState(phi, tc.t, step), dt_history

    def _advance(self, phi, t, dt, alpha, scheme, conservation):
        y_n = phi
        y = phi
        t_sub = t
        for a, ct in scheme.combos:
            f = self.rhs(y, t_sub, alpha)
            y_euler = y + dt * f
            if conservation:
                diag = conservation_check(y, y_euler, -f, dt,
                                          self.grid.cell_widths)
                scale = max(float(np.max(np.abs(f))), 1e-30)
                self.conservation_residual = max(
                    self.conservation_residual, diag.residual / scale
                )
            y = a * y_n + (1.0 - a) * y_euler
            y = self._post_stage(y, t + ct * dt)
            t_sub = t + ct * dt
        return y


class Solver2D:
    """Dimension-by-dimension stepper on a tensor-product grid."""

    def __init__(self, grid2d, model, order, cfl, beta=None, lam=None,
                 config=None, bc="periodic"):
        self.grid = grid2d
        self.model = model
        self.order = int(order)
        self.cfl = float(cfl)
        self.beta = validate_beta(
            beta if beta is not None else select_beta(order, 2), order
        )
        self.config = config or WenoConfig(lam=lam)
        if lam is not None and config is None:
            self.config = WenoConfig(lam=lam)
        self.bc = bc
        self.tham = transform_2d(model, grid2d)
        self.xx, self.yy = grid2d.meshgrid()
        self._cache = _KernelCache()
        self._kernel_bc = "periodic" if bc == "periodic" else "derivative-data"
        self.conservation_residual = 0.0

    def wave_speeds(self, phi):
        gs = getattr(self.model, "global_speed", None)
        if gs is not None:
            return float(gs[0]), float(gs[1])
        ax, ay = self.grid.axis_x, self.grid.axis_y
        p_rng = _pad_range(_slope_range(phi, ax.cell_widths[:, None], axis=0))
        q_rng = _pad_range(_slope_range(phi, ay.cell_widths[None, :], axis=1))
        cp, cq = self.model.speed_bound(p_rng, q_rng, x=self.xx, y=self.yy)
        return max(cp, SPEED_FLOOR), max(cq, SPEED_FLOOR)

    def spacings(self):
        out = []
        for ax in (self.grid.axis_x, self.grid.axis_y):
            out.append(float(ax.cell_widths[0]) if ax.uniform else ax.delta_xi)
        return out

    def _kernel(self, axis, alpha):
        g = self.grid.axis_x if axis == 0 else self.grid.axis_y
        return self._cache.get(
            ("axis", axis), alpha,
            lambda: LineKernel(g.xi, self._kernel_bc, alpha, self.order,
                               config=self.config),
        )

    def derivatives(self, phi, alpha_x, alpha_y):
        """Biased derivative fields in both directions (xi and eta)."""
        bd_x = self._kernel(0, alpha_x).biased_derivatives(phi)
        phit = np.ascontiguousarray(phi.T)
        bd_y = self._kernel(1, alpha_y).biased_derivatives(phit)
        return (bd_x.minus, bd_x.plus,
                np.ascontiguousarray(bd_y.minus.T),
                np.ascontiguousarray(bd_y.plus.T))

    def rhs(self, phi, t, alpha_x, alpha_y):
        um, up, vm, vp = self.derivatives(phi, alpha_x, alpha_y)
        xi_x = self.grid.axis_x.xi_x[:, None]
        eta_y = self.grid.axis_y.xi_x[None, :]
        pm, pp = xi_x * np.minimum(um, up), xi_x * np.maximum(um, up)
        qm, qp = eta_y * np.minimum(vm, vp), eta_y * np.maximum(vm, vp)
        disp_x = xi_x * self.model.bound_p(pm, pp, qm, qp, self.xx, self.yy)
        disp_y = eta_y * self.model.bound_q(pm, pp, qm, qp, self.xx, self.yy)
        havg = self.tham.evaluate(0.5 * (um + up), 0.5 * (vm + vp))
        return -(havg - 0.5 * disp_x * (up - um) - 0.5 * disp_y * (vp - vm))

    def run(self, initial, t_final, max_steps=10**7, conservation=False):
        phi = np.asarray(initial(self.xx, self.yy), dtype=float)
        tc = TimeController(cfl=self.cfl, t_final=t_final)
        scheme = RKScheme.of_order(self.order)
        dt_history = []
        step = 0
        mx = self.grid.axis_x.xi_x.max()
        my = self.grid.axis_y.xi_x.max()
        while not tc.done and step < max_steps:
            cx, cy = self.wave_speeds(phi)
            dt = tc.next_dt(self.spacings(), [cx, cy])
            alpha_x = self.beta / (cx * mx * dt)
            alpha_y = self.beta / (cy * my * dt)
            y_n = phi
            y = phi
            t_sub = tc.t
            for a, ct in scheme.combos:
                f = self.rhs(y, t_sub, alpha_x, alpha_y)
                y = a * y_n + (1.0 - a) * (y + dt * f)
                t_sub = tc.t + ct * dt
            phi = y
            if not np.all(np.isfinite(phi)):
                raise DivergenceError(
                    f"non-finite field at step {step}", step=step, time=tc.t
                )
            tc.advance()
            dt_history.append(dt)
            step += 1
        return SolveState(phi, tc.t, step), dt_history


class _SegLine:
    """Discretization of one embedded segment.

    A Dirichlet end keeps the boundary intersection point on the kernel
    line (absorbing an interior node that sits closer than 0.3 h to it,
    whose derivatives are then interpolated); an outflow end simply stops
    the line at the last interior node and lets the one-sided closures
    extrapolate, exactly like a rectangular outflow edge.
    """

    def __init__(self, seg, boundary_value, background, min_kernel_nodes=7):
        self.seg = seg
        i0, i1 = seg.index_range
        axis_grid = background.axis_x if seg.axis == 0 else background.axis_y
        other_grid = background.axis_y if seg.axis == 0 else background.axis_x
        coords = axis_grid.physical_nodes
        h = float(axis_grid.cell_widths[0])
        self.other = float(other_grid.physical_nodes[seg.line_index])

        def probe(pt):
            args = (pt, self.other) if seg.axis == 0 else (self.other, pt)
            return boundary_value(args[0], args[1], 0.0) is not None

        self.lo_dirichlet = probe(seg.nodes[0])
        self.hi_dirichlet = probe(seg.nodes[-1])
        self.skip_lo = self.lo_dirichlet and (coords[i0] - seg.nodes[0]) < 0.1 * h
        self.skip_hi = self.hi_dirichlet and (seg.nodes[-1] - coords[i1]) < 0.1 * h
        self.n0 = i0 + int(self.skip_lo)
        self.n1 = i1 - int(self.skip_hi)
        parts = []
        if self.lo_dirichlet:
            parts.append([seg.nodes[0]])
        parts.append(coords[self.n0 : self.n1 + 1])
        if self.hi_dirichlet:
            parts.append([seg.nodes[-1]])
        self.line_nodes = np.concatenate(parts)
        self.coords = coords
        self.short = self.line_nodes.size < min_kernel_nodes

    def operand(self, phi, t, boundary_value):
        if self.seg.axis == 0:
            inner = phi[self.n0 : self.n1 + 1, self.seg.line_index]
        else:
            inner = phi[self.seg.line_index, self.n0 : self.n1 + 1]
        parts = []
        if self.lo_dirichlet:
            pt = self.seg.nodes[0]
            args = (pt, self.other) if self.seg.axis == 0 else (self.other, pt)
            parts.append([boundary_value(args[0], args[1], t)])
        parts.append(inner)
        if self.hi_dirichlet:
            pt = self.seg.nodes[-1]
            args = (pt, self.other) if self.seg.axis == 0 else (self.other, pt)
            parts.append([boundary_value(args[0], args[1], t)])
        return np.concatenate(parts)

    def upwind_derivatives(self, vals):
        """First-order one-sided slopes for under-resolved lines."""
        x = self.line_nodes
        minus = np.empty_like(vals)
        plus = np.empty_like(vals)
        dv = np.diff(vals) / np.diff(x)
        minus[1:] = dv
        minus[0] = dv[0]
        plus[:-1] = dv
        plus[-1] = dv[-1]
        return minus, plus

    def scatter(self, part, full):
        """Write one derivative array into the full field."""
        lo = 1 if self.lo_dirichlet else 0
        hi = part.shape[0] - (1 if self.hi_dirichlet else 0)
        inner = part[lo:hi]
        seg = self.seg
        if seg.axis == 0:
            full[self.n0 : self.n1 + 1, seg.line_index] = inner
        else:
            full[seg.line_index, self.n0 : self.n1 + 1] = inner
        for skip, idx, sl in (
            (self.skip_lo, seg.index_range[0], slice(0, 3)),
            (self.skip_hi, seg.index_range[1], slice(-3, None)),
        ):
            if not skip:
                continue
            val = _lagrange3(self.coords[idx], self.line_nodes[sl], part[sl])
            if seg.axis == 0:
                full[idx, seg.line_index] = val
            else:
                full[seg.line_index, idx] = val


def _lagrange3(target, xs, vs):
    """Quadratic Lagrange evaluation through three points."""
    l0 = ((target - xs[1]) * (target - xs[2])) / \
        ((xs[0] - xs[1]) * (xs[0] - xs[2]))
    l1 = ((target - xs[0]) * (target - xs[2])) / \
        ((xs[1] - xs[0]) * (xs[1] - xs[2]))
    l2 = ((target - xs[0]) * (target - xs[1])) / \
        ((xs[2] - xs[0]) * (xs[2] - xs[1]))
    return l0 * vs[0] + l1 * vs[1] + l2 * vs[2]


class SolverEmbedded:
    """Stepper for a domain embedded in a background Cartesian grid.

    Each boundary-cut segment is an independent non-periodic line; the
    first and last cells are irregular, everything else reuses the uniform
    machinery.  The domain's boundary-value callable returns Dirichlet
    data at inflow boundary points and None where the boundary is outflow.
    """

    def __init__(self, domain, model, order, cfl, beta=None, lam=None,
                 config=None):
        self.domain = domain
        self.model = model
        self.order = int(order)
        self.cfl = float(cfl)
        self.beta = validate_beta(
            beta if beta is not None else select_beta(order, 2), order
        )
        self.config = config or WenoConfig(lam=lam)
        if lam is not None and config is None:
            self.config = WenoConfig(lam=lam)
        bg = domain.background
        self.xx, self.yy = bg.meshgrid()
        self.mask = domain.inside
        self._cache = _KernelCache()
        self._lines = []
        for segs in list(domain.x_lines) + list(domain.y_lines):
            for s in segs:
                self._lines.append(_SegLine(s, domain.boundary_value, bg))
        self._pinned = domain.pinned

    def wave_speeds(self, phi):
        gs = getattr(self.model, "global_speed", None)
        if gs is not None:
            return float(gs[0]), float(gs[1])
        return 1.0, 1.0  # embedded benchmark Hamiltonians are 1-Lipschitz

    def _kernel(self, line, alpha):
        seg = line.seg
        key = ("seg", seg.axis, seg.line_index, seg.index_range)
        return self._cache.get(
            key, alpha,
            lambda: LineKernel(line.line_nodes, "derivative-data", alpha,
                               self.order, config=self.config,
                               data_mode="reduced"),
        )

    def rhs(self, phi, t, alpha_x, alpha_y):
        shape = phi.shape
        um = np.zeros(shape)
        up = np.zeros(shape)
        vm = np.zeros(shape)
        vp = np.zeros(shape)
        g = self.domain.boundary_value
        for line in self._lines:
            vals = line.operand(phi, t, g)
            if line.short:
                minus, plus = line.upwind_derivatives(vals)
            else:
                alpha = alpha_x if line.seg.axis == 0 else alpha_y
                bd = self._kernel(line, alpha).biased_derivatives(vals)
                minus, plus = bd.minus, bd.plus
            fields = (um, up) if line.seg.axis == 0 else (vm, vp)
            line.scatter(minus, fields[0])
            line.scatter(plus, fields[1])
        pm, pp = np.minimum(um, up), np.maximum(um, up)
        qm, qp = np.minimum(vm, vp), np.maximum(vm, vp)
        disp_x = self.model.bound_p(pm, pp, qm, qp, self.xx, self.yy)
        disp_y = self.model.bound_q(pm, pp, qm, qp, self.xx, self.yy)
        havg = self.model.evaluate(0.5 * (um + up), 0.5 * (vm + vp),
                                   x=self.xx, y=self.yy)
        out = -(havg - 0.5 * disp_x * (up - um) - 0.5 * disp_y * (vp - vm))
        return np.where(self.mask, out, 0.0)

    def run(self, initial, t_final, max_steps=10**7, conservation=False):
        phi = np.asarray(initial(self.xx, self.yy), dtype=float)
        bg = self.domain.background
        hx = float(bg.axis_x.cell_widths[0])
        hy = float(bg.axis_y.cell_widths[0])
        tc = TimeController(cfl=self.cfl, t_final=t_final)
        scheme = RKScheme.of_order(self.order)
        dt_history = []
        step = 0
        while not tc.done and step < max_steps:
            cx, cy = self.wave_speeds(phi)
            dt = tc.next_dt([hx, hy], [cx, cy])
            alpha_x = self.beta / (cx * dt)
            alpha_y = self.beta / (cy * dt)
            y_n = phi
            y = phi
            t_sub = tc.t
            for a, ct in scheme.combos:
                f = self.rhs(y, t_sub, alpha_x, alpha_y)
                y = a * y_n + (1.0 - a) * (y + dt * f)
                t_sub = tc.t + ct * dt
                y = self._apply_pins(y, t_sub)
            phi = y
            if not np.all(np.isfinite(phi[self.mask])):
                raise DivergenceError(
                    f"non-finite field at step {step}", step=step, time=tc.t
                )
            tc.advance()
            dt_history.append(dt)
            step += 1
        return SolveState(phi, tc.t, step), dt_history

    def _apply_pins(self, phi, t):
        if self._pinned is None or not self._pinned.any():
            return phi
        g = self.domain.boundary_value
        out = phi.copy()
        idx = np.argwhere(self._pinned)
        for i, j in idx:
            out[i, j] = g(self.xx[i, j], self.yy[i, j], t)
        return out


# -- problem-level driver --------------------------------------------------------


@dataclass
class RunResult:
    state: SolveState
    grid: object
    dt_history: list
    wall_time: float
    manifest: dict
    solver: object = None
    mask: np.ndarray | None = None


def _build_axis(problem, n, axis, seed):
    bounds = problem.domain[axis] if problem.dimension == 2 else problem.domain
    periodic = problem.bc == "periodic"
    mapping = problem.mapping
    if mapping is None:
        return make_grid_1d(bounds, n, "uniform", periodic=periodic)
    if mapping in ("perturbed", "geometric"):
        return make_grid_1d(bounds, n, mapping, periodic=periodic,
                            seed=seed + axis)
    if callable(mapping):
        return build_grid_1d(mapping, n, bounds, periodic=periodic)
    raise InvalidParameterError(f"unknown mapping {mapping!r}")


def run(problem, n, cfl=0.5, order=3, beta=None, lam=None, seed=0,
        t_final=None, conservation=False):
    """Execute one benchmark problem at resolution n (per direction)."""
    t_end = float(t_final if t_final is not None else problem.t_final)
    config = WenoConfig(lam=lam)
    t0 = _time.perf_counter()
    model = problem.make_model()
    if problem.bc == "embedded":
        domain = problem.make_domain(n)
        solver = SolverEmbedded(domain, model, order, cfl, beta=beta,
                                config=config)
        state, dts = solver.run(problem.initial, t_end)
        grid = domain
        mask = domain.inside
    elif problem.dimension == 1:
        g = _build_axis(problem, n, 0, seed)
        solver = Solver1D(g, model, order, cfl, beta=beta, config=config,
                          bc=problem.bc, dirichlet=problem.dirichlet)
        state, dts = solver.run(problem.initial, t_end,
                                conservation=conservation)
        grid = g
        mask = None
    else:
        gx = _build_axis(problem, n, 0, seed)
        gy = _build_axis(problem, n, 1, seed)
        g2 = TensorGrid2D(gx, gy)
        solver = Solver2D(g2, model, order, cfl, beta=beta, config=config,
                          bc=problem.bc)
        state, dts = solver.run(problem.initial, t_end)
        grid = g2
        mask = None
    wall = _time.perf_counter() - t0
    manifest = {
        "problem": problem.name,
        "n": n,
        "cfl": cfl,
        "order": order,
        "beta": solver.beta,
        "lambda": lam,
        "epsilon": config.epsilon,
        "epsilon_scaled": config.epsilon_scaled,
        "seed": seed,
        "t_final": t_end,
        "steps": state.step_count,
        "dt_first": dts[0] if dts else None,
        "dt_last": dts[-1] if dts else None,
        "wall_time_s": wall,
    }
    return RunResult(state, grid, dts, wall, manifest, solver=solver, mask=mask)


# -- artifacts -------------------------------------------------------------------


def write_snapshot_1d(path, grid, state, derivatives=None):
    """CSV columns: x, phi, phix_minus, phix_plus (physical derivatives)."""
    x = grid.physical_nodes
    if derivatives is not None:
        dm = derivatives.minus * grid.xi_x
        dp = derivatives.plus * grid.xi_x
    else:
        dm = dp = np.full_like(x, np.nan)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,phi,phix_minus,phix_plus\n")
        for i in range(x.size):
            fh.write(f"{x[i]:.16e},{state.field[i]:.16e},"
                     f"{dm[i]:.16e},{dp[i]:.16e}\n")


def write_snapshot_2d(path, grid, state, mask=None):
    """Structured JSON: grid metadata plus the row-major field."""
    if isinstance(grid, TensorGrid2D):
        xs = grid.axis_x.physical_nodes
        ys = grid.axis_y.physical_nodes
    else:  # embedded domain
        xs = grid.background.axis_x.physical_nodes
        ys = grid.background.axis_y.physical_nodes
    doc = {
        "time": state.time,
        "x": xs.tolist(),
        "y": ys.tolist(),
        "field": state.field.tolist(),
    }
    if mask is not None:
        doc["inside"] = mask.astype(int).tolist()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def read_snapshot_2d(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return doc


def write_manifest(path, manifest):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def read_manifest(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
