"""Exponential-basis WENO quadrature of the per-cell kernel integrals.

Every spatial operator in this package reduces to weighted integrals of the
operand against a one-sided exponential kernel over single mesh cells.  This
module builds the quadrature rules for those integrals on a six-point stencil
split into three four-point substencils, using the interpolation spaces

    global stencil:  span{1, u, u^2, u^3, exp(+l*u), exp(-l*u)}
    substencils:     span{1, u, exp(+l*u), exp(-l*u)}

together with generalized undivided differences, smoothness indicators,
WENO-P+3 style nonlinear weights, and the per-node damping filter ``sigma``
used to switch off higher operator-composition terms near derivative kinks.

Conventions: for the right-looking integral at node i the cell is
[x_{i-1}, x_i]; node offsets are measured from x_i in units of the cell width,
so the cell is u in [-1, 0] and the kernel is ``a*exp(a*u)`` with
``a = alpha*dx``.  The left-looking integral is the mirror image.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import (
    IllConditionedBasisError,
    InconsistentWeightsError,
    SingularSystemError,
)

# Numbering of the three substencils inside a centered six-point window.
# Side "R": window nodes are i-3..i+2, substencil r covers slots r..r+3.
# Side "L": window nodes are i-2..i+3, substencil r covers slots 2-r..6-r.
_SUB_SLOT = {"R": (0, 1, 2), "L": (2, 1, 0)}
# Window slot touched only by substencil 0 resp. 2 (pins d0 and d2).
_D_PIN = {"R": ((0, 0), (5, 3)), "L": ((5, 3), (0, 0))}

RESIDUAL_TOL = 1e-10


def smoothstep(t):
    """Clamped cubic ramp: 0 for t<=0, 3t^2-2t^3 on (0,1), 1 for t>=1."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _decayed_mean(z):
    """(1 - exp(-z))/z, the mean of exp(-z*u) over u in [0,1]; 1 at z=0."""
    z = float(z)
    if z == 0.0:
        return 1.0
    return -np.expm1(-z) / z


def _poly_moments(a, jmax, frac=1.0):
    """Moments a*int_{-frac}^{0} exp(a*u) u^j du for j = 0..jmax."""
    out = np.empty(jmax + 1)
    ac = a * frac
    if ac < 1.0:
        # Series in a; the recursion below cancels catastrophically here.
        for j in range(jmax + 1):
            s = 0.0
            term = 1.0
            fpow = frac ** (j + 1)
            for m in range(60):
                c = term * fpow * ((-1.0) ** ((j + m) % 2)) / (j + m + 1)
                s += c
                term *= a / (m + 1)
                fpow *= frac
                if abs(term * fpow) < 1e-30:
                    break
            out[j] = a * s
        return out
    emac = np.exp(-ac)
    p = -np.expm1(-ac) / a
    out[0] = a * p
    for j in range(1, jmax + 1):
        p = ((-1.0) ** (j + 1) * frac**j * emac - j * p) / a
        out[j] = a * p
    return out


def _exp_moment(a, c, frac=1.0):
    """Moment a*int_{-frac}^{0} exp(a*u) exp(c*u) du."""
    return a * frac * _decayed_mean((a + c) * frac)


def _basis_rows(offsets, l_dx, n_poly):
    """Rows = basis functions {u^0..u^{n_poly-1}, e^{+lu}, e^{-lu}} at offsets."""
    offsets = np.asarray(offsets, dtype=float)
    rows = [offsets**j for j in range(n_poly)]
    rows.append(np.exp(l_dx * offsets))
    rows.append(np.exp(-l_dx * offsets))
    return np.vstack(rows)


def exp_quadrature_coeffs(offsets, a_dx, l_dx, side="R", cell_fraction=1.0):
    """Quadrature coefficients for one cell integral on the given stencil.

    ``offsets`` are node positions relative to the evaluation node in units
    of a reference spacing; the integration cell spans ``cell_fraction`` of
    that spacing (1 on uniform meshes, smaller for boundary-cut cells so
    tiny cells never spoil the conditioning).  Four offsets select the
    substencil space, six the global space.  Returns the coefficient vector
    c with sum(c * v(offsets)) ~ the kernel-weighted cell integral of v.
    """
    offsets = np.asarray(offsets, dtype=float)
    if side == "L":
        return exp_quadrature_coeffs(-offsets, a_dx, l_dx, side="R",
                                     cell_fraction=cell_fraction)
    if a_dx <= 0.0 or l_dx <= 0.0 or cell_fraction <= 0.0:
        raise IllConditionedBasisError(
            f"quadrature needs positive a*dx, l*dx and cell fraction, got "
            f"{a_dx}, {l_dx}, {cell_fraction}"
        )
    n_poly = offsets.size - 2
    if n_poly < 1:
        raise SingularSystemError("stencil must have at least 3 nodes")
    mat = _basis_rows(offsets, l_dx, n_poly)
    mom = np.empty(offsets.size)
    mom[:n_poly] = _poly_moments(a_dx, n_poly - 1, cell_fraction)
    mom[n_poly] = _exp_moment(a_dx, l_dx, cell_fraction)
    mom[n_poly + 1] = _exp_moment(a_dx, -l_dx, cell_fraction)
    if np.linalg.cond(mat) > 1e12:
        raise IllConditionedBasisError(
            f"interpolation matrix condition exceeds 1e12 (l*dx={l_dx})"
        )
    coeffs = np.linalg.solve(mat, mom)
    # One step of iterative refinement; exactness tests sit near 1e-11.
    coeffs += np.linalg.solve(mat, mom - mat @ coeffs)
    return coeffs


def undivided_diff_coeffs(offsets, m):
    """Coefficients c with sum(c*v(nodes)) ~ dx^m v^(m) at the base node.

    ``offsets`` are (x_n - x_i)/dx.  Exact for polynomials of degree below
    the stencil size.
    """
    offsets = np.asarray(offsets, dtype=float)
    n = offsets.size
    if m >= n:
        raise SingularSystemError(f"order-{m} difference needs more than {n} nodes")
    v = np.vstack([offsets**k / factorial(k) for k in range(n)])
    rhs = np.zeros(n)
    rhs[m] = 1.0
    try:
        return np.linalg.solve(v, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"duplicate stencil nodes: {offsets}") from exc


def linear_weights(global_coeffs, sub_coeffs, side="R"):
    """Split the global quadrature functional across the three substencils.

    d0 and d2 are pinned by the two window slots that only one substencil
    touches, d1 completes the partition of unity, and the residual measures
    how well the combination reproduces the global functional on the four
    shared slots.
    """
    global_coeffs = np.asarray(global_coeffs, dtype=float)
    slots = _SUB_SLOT[side]
    (pin0_w, pin0_s), (pin2_w, pin2_s) = _D_PIN[side]
    d = np.empty(3)
    d[0] = global_coeffs[pin0_w] / sub_coeffs[0][pin0_s]
    d[2] = global_coeffs[pin2_w] / sub_coeffs[2][pin2_s]
    d[1] = 1.0 - d[0] - d[2]
    recombined = np.zeros(6)
    for r in range(3):
        s = slots[r]
        recombined[s : s + 4] += d[r] * sub_coeffs[r]
    mask = np.ones(6, dtype=bool)
    mask[[pin0_w, pin2_w]] = False
    residual = float(np.max(np.abs(global_coeffs - recombined)[mask]))
    if residual > RESIDUAL_TOL:
        raise InconsistentWeightsError(
            f"linear-weight residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )
    return d, residual


def smoothness_indicators(window, udd2, udd3):
    """Squared undivided differences per substencil and their spread tau."""
    window = np.asarray(window, dtype=float)
    d2 = udd2 @ window if udd2.ndim == 2 else np.array([c @ window for c in udd2])
    d3 = udd3 @ window if udd3.ndim == 2 else np.array([c @ window for c in udd3])
    beta = d2 * d2 + d3 * d3
    tau = abs(beta[0] - beta[2])
    return beta, tau


def nonlinear_weights(beta, tau, d, epsilon):
    """WENO-P+3 weights: smooth data recovers d, rough substencils drop out."""
    beta = np.asarray(beta, dtype=float)
    raw = d * (1.0 + tau / (epsilon + beta) + 0.5 * (beta / (epsilon + tau)) ** 2)
    return raw / raw.sum()


def filter_theta(window, udd1, udd2, epsilon):
    """Min/max ratio of |D1|+|D2| over the four three-point subwindows."""
    window = np.asarray(window, dtype=float)
    act = np.abs(udd1 @ window) + np.abs(udd2 @ window)
    return (act.min() + epsilon) / (act.max() + epsilon)


def filter_sigma(window, udd1, udd2, epsilon):
    """Damping factor in [0,1] for higher partial-sum terms at one node."""
    return float(smoothstep(2.0 * filter_theta(window, udd1, udd2, epsilon) ** 2))


@dataclass(frozen=True)
class WenoConfig:
    """Tunables of the reconstruction.

    ``lam`` is the tension of the exponential basis per unit of the line
    coordinate; None resolves to 20 per unit line length, i.e. lam*dxi = 1
    on a 20-cell line and held fixed under refinement.  (A tension that
    tracks the mesh as 1/dxi caps the rule at 4th order: the space's
    annihilator is v'''''' - lam^2 v'''', so lam^2 ~ 1/dxi^2 promotes a
    4th-order error term.)  ``epsilon_scaled`` selects the resolution-aware
    smoothing floor eps = (cell width)^2; set it False to use the fixed
    ``epsilon`` instead.
    """

    lam: float | None = None
    epsilon: float = 1e-6
    epsilon_scaled: bool = True

    def resolve_lam(self, length):
        return self.lam if self.lam is not None else 20.0 / float(length)


@dataclass(frozen=True)
class QuadratureTable:
    """Precomputed rule for one cell: functionals on the six-point window."""

    offsets: np.ndarray
    global_coeffs: np.ndarray
    sub_coeffs: np.ndarray  # (3, 4)
    linear_d: np.ndarray  # (3,)
    residual: float
    udd2: np.ndarray  # (3, 4)
    udd3: np.ndarray  # (3, 4)
    weno_ok: bool
    side: str = "R"


@dataclass(frozen=True)
class CellReconstruction:
    """Reconstructed cell integral plus the per-cell diagnostics."""

    value: float
    omega: np.ndarray
    beta: np.ndarray
    tau: float
    theta: float
    sigma: float


# Relative subwindow starts (three nodes each) used by the sigma filter.
_FILTER_STARTS = {"R": (-3, -2, -1, 0), "L": (-2, -1, 0, 1)}


def build_cell_table(offsets, a_dx, l_dx, side="R", cell_fraction=1.0):
    """Quadrature table for one cell with the given node offsets.

    Falls back to the pure global rule (weno_ok=False) when the window is
    not the centered six-point pattern or the linear-weight split fails.
    """
    offsets = np.asarray(offsets, dtype=float)
    global_coeffs = exp_quadrature_coeffs(offsets, a_dx, l_dx, side,
                                          cell_fraction)
    slots = _SUB_SLOT[side]
    centered = offsets.size == 6 and abs(offsets[3 if side == "R" else 2]) < 1e-12
    zeros34 = np.zeros((3, 4))
    if not centered:
        return QuadratureTable(
            offsets, global_coeffs, zeros34, np.zeros(3), np.inf, zeros34, zeros34,
            False, side,
        )
    sub = np.empty((3, 4))
    udd2 = np.empty((3, 4))
    udd3 = np.empty((3, 4))
    for r in range(3):
        s = slots[r]
        sub[r] = exp_quadrature_coeffs(offsets[s : s + 4], a_dx, l_dx, side,
                                       cell_fraction)
        udd2[r] = undivided_diff_coeffs(offsets[s : s + 4], 2)
        udd3[r] = undivided_diff_coeffs(offsets[s : s + 4], 3)
    try:
        d, residual = linear_weights(global_coeffs, sub, side)
    except InconsistentWeightsError:
        return QuadratureTable(
            offsets, global_coeffs, zeros34, np.zeros(3), np.inf, zeros34, zeros34,
            False, side,
        )
    if np.any(d < 0.0):
        # Negative split weights: skip WENO weighting for this cell.
        return QuadratureTable(
            offsets, global_coeffs, sub, d, residual, udd2, udd3, False, side
        )
    return QuadratureTable(offsets, global_coeffs, sub, d, residual, udd2, udd3,
                           True, side)


def reconstruct_cell_integral(window, table, config, cell_width=1.0):
    """Apply a cell table to six samples, returning value and diagnostics."""
    window = np.asarray(window, dtype=float)
    eps = cell_width**2 if config.epsilon_scaled else config.epsilon
    linear_value = float(table.global_coeffs @ window)
    starts = _FILTER_STARTS[table.side]
    base = 3 if table.side == "R" else 2
    f1 = np.empty((4, 3))
    f2 = np.empty((4, 3))
    fwin = np.empty((4, 3))
    for r, s in enumerate(starts):
        offs = table.offsets[base + s : base + s + 3] if table.offsets.size == 6 \
            else np.arange(s, s + 3, dtype=float)
        f1[r] = undivided_diff_coeffs(offs, 1)
        f2[r] = undivided_diff_coeffs(offs, 2)
        fwin[r] = window[base + s : base + s + 3]
    act = np.abs(np.einsum("rc,rc->r", f1, fwin)) + np.abs(
        np.einsum("rc,rc->r", f2, fwin)
    )
    theta = (act.min() + eps) / (act.max() + eps)
    sigma = float(smoothstep(2.0 * theta * theta))
    if not table.weno_ok:
        return CellReconstruction(linear_value, table.linear_d.copy(),
                                  np.zeros(3), 0.0, theta, sigma)
    slots = _SUB_SLOT[table.side]
    sub_vals = np.array(
        [table.sub_coeffs[r] @ window[slots[r] : slots[r] + 4] for r in range(3)]
    )
    beta, tau = smoothness_indicators(window, _padded(table.udd2, slots),
                                      _padded(table.udd3, slots))
    omega = nonlinear_weights(beta, tau, table.linear_d, eps)
    return CellReconstruction(float(omega @ sub_vals), omega, beta, tau, theta, sigma)


def _padded(sub_mats, slots):
    """Embed (3,4) substencil functionals into (3,6) window functionals."""
    out = np.zeros((3, 6))
    for r in range(3):
        out[r, slots[r] : slots[r] + 4] = sub_mats[r]
    return out


class LineQuadrature:
    """Vectorized per-line quadrature: all cells of one 1-D line at once.

    Handles batches of parallel lines sharing the same geometry (the second
    array axis).  Periodic lines must be uniformly spaced; non-periodic
    lines may have irregular cells (the tables then vary per node and the
    windows near the ends are shifted inward, where only the global rule is
    used).
    """

    def __init__(self, nodes, periodic, alpha, lam, config=None):
        self.nodes = np.asarray(nodes, dtype=float)
        self.periodic = bool(periodic)
        self.alpha = float(alpha)
        self.config = config or WenoConfig()
        n = self.nodes.size
        m = n - 1
        if m < 5:
            raise SingularSystemError("line needs at least 5 cells")
        self.widths = np.diff(self.nodes)
        self.uniform = bool(
            np.allclose(self.widths, self.widths[0], rtol=1e-9, atol=0.0)
        )
        if self.periodic and not self.uniform:
            raise SingularSystemError("periodic lines must be uniformly spaced")
        if lam is not None:
            self.lam = float(lam)
        else:
            self.lam = self.config.resolve_lam(self.nodes[-1] - self.nodes[0])
        self.n_nodes = n
        self.n_cells = m
        # Reference spacing for stencil scaling: boundary-cut end cells can
        # be arbitrarily thin, so offsets are never scaled by the cell itself.
        self.scale = float(np.median(self.widths))
        # A boundary node closer than a quarter spacing to its neighbour is
        # excluded from interpolation stencils (near-duplicate nodes make the
        # systems ill-conditioned and amplify noise); its cell integral is
        # still taken over the true cut cell.
        self.thin_start = (not self.periodic) and \
            self.widths[0] < 0.05 * self.scale
        self.thin_end = (not self.periodic) and \
            self.widths[-1] < 0.05 * self.scale
        self._cache: dict = {}
        self._sides = {}
        for side in ("R", "L"):
            self._sides[side] = self._build_side(side)
        self._filters = {side: self._build_filter(side) for side in ("R", "L")}
        self.last_diagnostics = None

    # -- table construction -------------------------------------------------

    def _cell_of_node(self, i, side):
        return i - 1 if side == "R" else i

    def _row_nodes(self, side):
        if side == "R":
            return np.arange(1, self.n_cells + 1)
        return np.arange(0, self.n_cells)

    def _window_base(self, i, side):
        first = i - 3 if side == "R" else i - 2
        if self.periodic:
            return first
        lo = 1 if self.thin_start else 0
        hi = (self.n_nodes - 2 if self.thin_end else self.n_nodes - 1) - 5
        return int(np.clip(first, lo, hi))

    def _table_for(self, offsets, frac, side):
        key = (side, round(frac, 12), tuple(np.round(offsets, 12)))
        tab = self._cache.get(key)
        if tab is None:
            tab = build_cell_table(offsets, self.alpha * self.scale,
                                   self.lam * self.scale, side,
                                   cell_fraction=frac)
            self._cache[key] = tab
        return tab

    def _build_side(self, side):
        rows = self._row_nodes(side)
        nr = rows.size
        idx = np.empty((nr, 6), dtype=np.intp)
        cg = np.empty((nr, 6))
        csub = np.zeros((nr, 3, 6))
        d = np.zeros((nr, 3))
        u2 = np.zeros((nr, 3, 6))
        u3 = np.zeros((nr, 3, 6))
        ok = np.zeros(nr, dtype=bool)
        slots = _SUB_SLOT[side]
        for k, i in enumerate(rows):
            base = self._window_base(i, side)
            win = base + np.arange(6)
            cell = self._cell_of_node(i, side)
            w = self.widths[cell]
            if self.periodic:
                # Unwrapped positions keep offsets affine across the seam.
                pos = self.nodes[win % self.n_cells] + (win // self.n_cells) * (
                    self.nodes[-1] - self.nodes[0]
                )
                idx[k] = win % self.n_cells
            else:
                pos = self.nodes[win]
                idx[k] = win
            offsets = (pos - self.nodes[i]) / self.scale
            tab = self._table_for(offsets, w / self.scale, side)
            cg[k] = tab.global_coeffs
            ok[k] = tab.weno_ok
            if tab.weno_ok:
                d[k] = tab.linear_d
                for r in range(3):
                    s = slots[r]
                    csub[k, r, s : s + 4] = tab.sub_coeffs[r]
                u2[k] = _padded(tab.udd2, slots)
                u3[k] = _padded(tab.udd3, slots)
        eps = self.config.epsilon * np.ones(nr)
        if self.config.epsilon_scaled:
            eps = np.full(nr, self.scale**2)
        return {
            "rows": rows, "idx": idx, "cg": cg, "csub": csub, "d": d,
            "u2": u2, "u3": u3, "ok": ok, "eps": eps,
        }

    def _build_filter(self, side):
        n = self.n_nodes
        m = self.n_cells
        starts = _FILTER_STARTS[side]
        fidx = np.empty((n, 4, 3), dtype=np.intp)
        f1 = np.empty((n, 4, 3))
        f2 = np.empty((n, 4, 3))
        cache = {}
        lo = 1 if self.thin_start else 0
        hi = (n - 2 if self.thin_end else n - 1) - 2
        for i in range(n):
            w = self.scale
            for r, s in enumerate(starts):
                first = i + s
                if self.periodic:
                    win = first + np.arange(3)
                    pos = self.nodes[win % m] + (win // m) * (
                        self.nodes[-1] - self.nodes[0]
                    )
                    fidx[i, r] = win % m
                else:
                    first = int(np.clip(first, lo, hi))
                    win = first + np.arange(3)
                    pos = self.nodes[win]
                    fidx[i, r] = win
                offs = (pos - self.nodes[i]) / w
                key = tuple(np.round(offs, 12))
                if key not in cache:
                    cache[key] = (
                        undivided_diff_coeffs(offs, 1),
                        undivided_diff_coeffs(offs, 2),
                    )
                f1[i, r], f2[i, r] = cache[key]
        eps = self.config.epsilon
        if self.config.epsilon_scaled:
            eps = self.scale**2
        return {"fidx": fidx, "f1": f1, "f2": f2, "eps": eps}

    # -- evaluation ----------------------------------------------------------

    def _gather(self, v, idx):
        return v[idx]  # fancy indexing broadcasts over trailing line axis

    def _side_values(self, v, side, weno, collect=False):
        t = self._sides[side]
        win = self._gather(v, t["idx"])  # (rows, 6[, L])
        glob = np.einsum("rc,rc...->r...", t["cg"], win)
        diag = None
        if not weno or not t["ok"].any():
            return glob, diag
        sub = np.einsum("rsc,rc...->rs...", t["csub"], win)
        d2 = np.einsum("rsc,rc...->rs...", t["u2"], win)
        d3 = np.einsum("rsc,rc...->rs...", t["u3"], win)
        beta = d2 * d2 + d3 * d3
        tau = np.abs(beta[:, 0] - beta[:, 2])
        eps = t["eps"].reshape((-1, 1) + (1,) * (beta.ndim - 2))
        taux = tau[:, None]
        dmat = t["d"].reshape(t["d"].shape + (1,) * (beta.ndim - 2))
        raw = dmat * (1.0 + taux / (eps + beta) + 0.5 * (beta / (eps + taux)) ** 2)
        denom = raw.sum(axis=1, keepdims=True)
        omega = raw / np.where(denom == 0.0, 1.0, denom)  # zero rows are masked out
        aj = (omega * sub).sum(axis=1)
        okmask = t["ok"].reshape((-1,) + (1,) * (aj.ndim - 1))
        if collect:
            diag = {"beta": beta, "tau": tau, "omega": omega}
        return np.where(okmask, aj, glob), diag

    def sigma(self, v, side):
        """Damping filter per node from the data itself."""
        t = self._filters[side]
        win = self._gather(v, t["fidx"])  # (n, 4, 3[, L])
        act = np.abs(np.einsum("nrc,nrc...->nr...", t["f1"], win)) + np.abs(
            np.einsum("nrc,nrc...->nr...", t["f2"], win)
        )
        theta = (act.min(axis=1) + t["eps"]) / (act.max(axis=1) + t["eps"])
        return smoothstep(2.0 * theta * theta), theta

    def local_integrals(self, v, weno=True, with_sigma=False, collect=False,
                        sides="RL"):
        """Per-cell kernel integrals of v for the requested sweep directions.

        Returns (jr, jl[, sigma_r, sigma_l]); jr[0] and jl[-1] are zero
        (no cell beyond the line ends).  A side omitted from ``sides`` comes
        back as None.
        """
        v = np.asarray(v, dtype=float)
        jr = jl = None
        diag_r = diag_l = None
        if "R" in sides:
            jr = np.zeros_like(v)
            vr, diag_r = self._side_values(v, "R", weno, collect)
            jr[1:] = vr
        if "L" in sides:
            jl = np.zeros_like(v)
            vl, diag_l = self._side_values(v, "L", weno, collect)
            jl[:-1] = vl
        if collect:
            self.last_diagnostics = {"R": diag_r, "L": diag_l}
        if not with_sigma:
            return jr, jl
        sig_r, theta_r = self.sigma(v, "R")
        sig_l, theta_l = self.sigma(v, "L")
        if collect and self.last_diagnostics:
            self.last_diagnostics["R"]["theta"] = theta_r
            self.last_diagnostics["R"]["sigma"] = sig_r
            self.last_diagnostics["L"]["theta"] = theta_l
            self.last_diagnostics["L"]["sigma"] = sig_l
        return jr, jl, sig_r, sig_l


def dump_diagnostics_csv(path, quad):
    """Write the last collected per-cell WENO diagnostics to CSV."""
    diag = quad.last_diagnostics
    if diag is None:
        raise ValueError("no diagnostics collected yet; run with collect=True")
    rows_r = diag["R"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("i,beta0,beta1,beta2,tau,omega0,omega1,omega2,theta,sigma\n")
        nr = rows_r["beta"].shape[0]
        for k in range(nr):
            beta = np.atleast_2d(rows_r["beta"][k].T)[0]
            omega = np.atleast_2d(rows_r["omega"][k].T)[0]
            tau = np.atleast_1d(rows_r["tau"][k]).ravel()[0]
            theta = np.atleast_1d(rows_r["theta"][k + 1]).ravel()[0]
            sigma = np.atleast_1d(rows_r["sigma"][k + 1]).ravel()[0]
            fh.write(
                f"{k + 1},{beta[0]:.16e},{beta[1]:.16e},{beta[2]:.16e},"
                f"{tau:.16e},{omega[0]:.16e},{omega[1]:.16e},{omega[2]:.16e},"
                f"{theta:.16e},{sigma:.16e}\n"
            )
