"""Hamiltonian models, coordinate-transformed forms and monotone fluxes.

Models evaluate H(p) or H(p, q) vectorized over node arrays and provide
sound upper bounds for |dH/dp| (and |dH/dq|) over argument boxes; the
bounds drive both the local Lax-Friedrichs dissipation and the global
time-step / kernel-parameter choices.  Spatially dependent Hamiltonians
receive the node coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidRangeError

_SAMPLES = 33  # per axis, for bounds of user-supplied models
_INFLATION = 1.1


class HamiltonianModel:
    """H plus wave-speed bounds; ``fn`` and bounds are vectorized.

    bound_p / bound_q signatures: (pmin, pmax, qmin, qmax, x, y) -> array
    of upper bounds for |dH/dp| resp. |dH/dq| over the boxes.  1-D models
    ignore the q and y slots.
    """

    def __init__(self, name, arity, fn, bound_p, bound_q=None,
                 space_dependent=False):
        self.name = name
        self.arity = arity
        self.fn = fn
        self.bound_p = bound_p
        self.bound_q = bound_q
        self.space_dependent = space_dependent

    def evaluate(self, p, q=None, x=None, y=None):
        if self.arity == 1:
            return self.fn(p, x) if self.space_dependent else self.fn(p)
        if self.space_dependent:
            return self.fn(p, q, x, y)
        return self.fn(p, q)

    def speed_bound(self, p_range, q_range=None, x=None, y=None):
        """Max |dH/dp| (and |dH/dq|) over the given argument ranges."""
        pmin, pmax = map(float, p_range)
        if not np.isfinite([pmin, pmax]).all() or pmin > pmax:
            raise InvalidRangeError(f"invalid p range {p_range}")
        if self.arity == 1:
            return float(np.max(self.bound_p(pmin, pmax, None, None, x, y)))
        if q_range is None:
            raise InvalidRangeError("2-D model needs a q range")
        qmin, qmax = map(float, q_range)
        if qmin > qmax:
            raise InvalidRangeError(f"invalid q range {q_range}")
        cp = float(np.max(self.bound_p(pmin, pmax, qmin, qmax, x, y)))
        cq = float(np.max(self.bound_q(pmin, pmax, qmin, qmax, x, y)))
        return cp, cq


def sampled_bounds(fn, arity):
    """Finite-difference speed bounds for a user-supplied Hamiltonian.

    Samples a 33-point lattice per axis over the query box and inflates
    the observed maximum slope by 10%.
    """

    def bound(which):
        def _bound(pmin, pmax, qmin, qmax, x, y):
            ps = np.linspace(pmin, pmax, _SAMPLES)
            if arity == 1:
                h = fn(ps)
                return _INFLATION * np.max(np.abs(np.gradient(h, ps)))
            qs = np.linspace(qmin, qmax, _SAMPLES)
            pp, qq = np.meshgrid(ps, qs, indexing="ij")
            h = fn(pp, qq)
            axis = 0 if which == "p" else 1
            coords = ps if which == "p" else qs
            if coords[0] == coords[-1]:
                return 0.0
            return _INFLATION * np.max(np.abs(np.gradient(h, coords, axis=axis)))
        return _bound

    return bound("p"), bound("q")


def user_model(name, arity, fn):
    bp, bq = sampled_bounds(fn, arity)
    return HamiltonianModel(name, arity, fn, bp, bq if arity == 2 else None)


# -- built-in models -----------------------------------------------------------


def _absmax(lo, hi):
    return np.maximum(np.abs(lo), np.abs(hi))


def _cos_interval_max(lo, hi):
    """max |cos(s)| over [lo, hi], elementwise."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    # |cos| attains 1 at integer multiples of pi.
    contains_peak = np.floor(hi / np.pi) >= np.ceil(lo / np.pi)
    ends = np.maximum(np.abs(np.cos(lo)), np.abs(np.cos(hi)))
    return np.where(contains_peak, 1.0, ends)


def linear_1d():
    m = HamiltonianModel(
        "linear1d", 1, lambda p: p,
        lambda *a: 1.0,
    )
    m.global_speed = (1.0,)
    return m


def burgers_1d():
    return HamiltonianModel(
        "burgers1d", 1, lambda p: 0.5 * (p + 1.0) ** 2,
        lambda pmin, pmax, *a: _absmax(pmin + 1.0, pmax + 1.0),
    )


def nonconvex_1d():
    """Double-well Hamiltonian (p^2-1)(p^2-4)/4 with derivative p^3-2.5p."""

    crit = np.sqrt(2.5 / 3.0)
    f_crit = abs(crit**3 - 2.5 * crit)

    def dmax(pmin, pmax, *a):
        pmin = np.asarray(pmin, dtype=float)
        pmax = np.asarray(pmax, dtype=float)
        dh = lambda p: np.abs(p**3 - 2.5 * p)
        out = np.maximum(dh(pmin), dh(pmax))
        hits = ((pmin <= crit) & (crit <= pmax)) | \
               ((pmin <= -crit) & (-crit <= pmax))
        return np.where(hits, np.maximum(out, f_crit), out)

    return HamiltonianModel(
        "riemann_nonconvex1d", 1,
        lambda p: 0.25 * (p**2 - 1.0) * (p**2 - 4.0),
        dmax,
    )


def linear_2d():
    one = lambda *a: 1.0
    m = HamiltonianModel(
        "linear2d", 2, lambda p, q: p + q + 1.0, one, one,
    )
    m.global_speed = (1.0, 1.0)
    return m


def burgers_2d():
    def bnd(pmin, pmax, qmin, qmax, *a):
        return _absmax(pmin + qmin + 1.0, pmax + qmax + 1.0)
    return HamiltonianModel(
        "burgers2d", 2, lambda p, q: 0.5 * (p + q + 1.0) ** 2, bnd, bnd,
    )


def riemann_2d():
    def bnd(pmin, pmax, qmin, qmax, *a):
        return _cos_interval_max(pmin + qmin, pmax + qmax)
    m = HamiltonianModel(
        "riemann_nonconvex2d", 2, lambda p, q: np.sin(p + q), bnd, bnd,
    )
    m.global_speed = (1.0, 1.0)
    return m


def control_2d():
    """Cost-determination model with bang-bang control sign(phi_y)."""

    def fn(p, q, x, y):
        return (np.sin(y) * p + (np.sin(x) + np.sign(q)) * q
                - 0.5 * np.sin(y) ** 2 - 1.0 + np.cos(x))

    def bp(pmin, pmax, qmin, qmax, x, y):
        return np.abs(np.sin(y)) if y is not None else 1.0

    def bq(pmin, pmax, qmin, qmax, x, y):
        return (np.abs(np.sin(x)) + 1.0) if x is not None else 2.0

    m = HamiltonianModel("control2d", 2, fn, bp, bq, space_dependent=True)
    m.global_speed = (1.0, 2.0)
    return m


def _optics_bound(which):
    def bnd(pmin, pmax, qmin, qmax, *a):
        m = _absmax(pmin, pmax) if which == "p" else _absmax(qmin, qmax)
        return m / np.sqrt(m * m + 1.0)
    return bnd


def optics_2d(sign=1.0):
    """Eikonal-type front Hamiltonian +-sqrt(p^2+q^2+1)."""
    m = HamiltonianModel(
        "optics2d" if sign > 0 else "surface2d", 2,
        lambda p, q: sign * np.sqrt(p * p + q * q + 1.0),
        _optics_bound("p"), _optics_bound("q"),
    )
    m.global_speed = (1.0, 1.0)
    return m


def reinit_2d(sign_field):
    """Distance-reinitialization Hamiltonian s(x,y)*(|grad phi| - 1).

    ``sign_field`` is the frozen sign of the initial level-set data,
    evaluated at node coordinates.
    """

    def fn(p, q, x, y):
        return sign_field(x, y) * (np.sqrt(p * p + q * q) - 1.0)

    def bnd(pmin, pmax, qmin, qmax, x, y):
        s = np.abs(sign_field(x, y)) if x is not None else 1.0
        return s

    m = HamiltonianModel("reinit2d", 2, fn, bnd, bnd, space_dependent=True)
    m.global_speed = (1.0, 1.0)
    return m


_REGISTRY = {
    "linear1d": linear_1d,
    "burgers1d": burgers_1d,
    "riemann_nonconvex1d": nonconvex_1d,
    "linear2d": linear_2d,
    "burgers2d": burgers_2d,
    "riemann_nonconvex2d": riemann_2d,
    "control2d": control_2d,
    "optics2d": lambda: optics_2d(+1.0),
    "surface2d": lambda: optics_2d(-1.0),
}


def registry():
    """Names of the built-in Hamiltonians constructible without data."""
    return sorted(_REGISTRY)


def get_model(name):
    return _REGISTRY[name]()


# -- coordinate transformation and fluxes ---------------------------------------


@dataclass
class TransformedHamiltonian:
    """H composed with the inverse mapping metric, per node.

    For tensor maps the transformed Hamiltonian is
    H(xi_x * u, eta_y * v) with u, v the computational-coordinate
    derivatives; wave-speed bounds scale by the same metric factors.
    """

    base: HamiltonianModel
    xi_x: np.ndarray  # shape (nx,) in 1-D, broadcastable (nx,1) in 2-D
    eta_y: np.ndarray | None = None
    coords: tuple | None = None  # node coordinate arrays for space-dependent H

    def evaluate(self, u, v=None):
        x = y = None
        if self.coords is not None:
            x = self.coords[0]
            y = self.coords[1] if len(self.coords) > 1 else None
        if self.base.arity == 1:
            return self.base.evaluate(self.xi_x * u, x=x)
        return self.base.evaluate(self.xi_x * u, self.eta_y * v, x=x, y=y)


def transform(model, grid, coords=None):
    """1-D transformed Hamiltonian on a mapped grid."""
    return TransformedHamiltonian(model, grid.xi_x,
                                  coords=(grid.physical_nodes,) if coords is None
                                  else coords)


def transform_2d(model, grid2d):
    xx, yy = grid2d.meshgrid()
    return TransformedHamiltonian(
        model,
        grid2d.axis_x.xi_x[:, None],
        grid2d.axis_y.xi_x[None, :],
        coords=(xx, yy),
    )


def llf_flux_1d(u_minus, u_plus, h_tilde, alpha_h):
    """Monotone flux: central evaluation plus one-sided dissipation."""
    return h_tilde(0.5 * (u_minus + u_plus)) - 0.5 * alpha_h * (u_plus - u_minus)


def llf_flux_2d(u_minus, u_plus, v_minus, v_plus, h_tilde, alpha_xi, alpha_eta):
    return (h_tilde(0.5 * (u_minus + u_plus), 0.5 * (v_minus + v_plus))
            - 0.5 * alpha_xi * (u_plus - u_minus)
            - 0.5 * alpha_eta * (v_plus - v_minus))


def max_wave_speed(model, p_range, q_range=None, x=None, y=None):
    """Global per-direction speed bound over the given argument ranges."""
    return model.speed_bound(p_range, q_range, x=x, y=y)
