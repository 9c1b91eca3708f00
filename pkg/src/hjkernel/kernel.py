"""One-sided derivative operators built from exponential convolution kernels.

The building blocks are the convolution integrals

    I_R[v](x) = alpha * int_a^x exp(-alpha (x-s)) v(s) ds
    I_L[v](x) = alpha * int_x^b exp(-alpha (s-x)) v(s) ds
    I_0       = (I_L + I_R) / 2

accumulated in O(N) by per-cell recurrences, and the difference operators

    D_R[v] = v - I_R[v] - A_R exp(-alpha (x-a))
    D_L[v] = v - I_L[v] - B_L exp(-alpha (b-x))
    D_0[v] = v - I_0[v] - A_0 exp(-alpha (x-a)) - B_0 exp(-alpha (b-x))

whose truncated composition sums approximate the one-sided first derivatives
(phi_x minus from D_R, phi_x plus from D_L) and the second derivative (from
D_0).  Closure constants come either from periodicity or from boundary
derivative data; the non-periodic sums carry extra exponential correction
terms so that no accuracy is lost at the ends.

All operations accept either a single line (1-D arrays over the nodes) or a
batch of lines sharing one geometry (2-D arrays, node axis first).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import (
    IncompleteClosureError,
    InvalidOrderError,
    InvalidParameterError,
    ShapeError,
)
from .weno import LineQuadrature, WenoConfig, undivided_diff_coeffs

#: Largest stable kernel ratio beta for each partial-sum order in 1-D.
BETA_MAX = {1: 2.0, 2: 1.0, 3: 1.243}


@dataclass(frozen=True)
class KernelParams:
    """Kernel inverse length alpha = beta/(c_max*dt) and the sum order."""

    alpha_kernel: float
    beta: float
    order: int

    def __post_init__(self):
        if self.order not in (1, 2, 3):
            raise InvalidOrderError(f"order must be 1, 2 or 3, got {self.order}")
        if self.alpha_kernel <= 0.0 or self.beta <= 0.0:
            raise InvalidParameterError("alpha and beta must be positive")
        if self.beta > BETA_MAX[self.order] + 1e-12:
            raise InvalidParameterError(
                f"beta={self.beta} exceeds the stability bound "
                f"{BETA_MAX[self.order]} for order {self.order}"
            )


@dataclass
class ConvolutionState:
    """Sweep results for one operand: node arrays of I_L, I_R and I_0."""

    i_left: np.ndarray
    i_right: np.ndarray
    i_zero: np.ndarray
    local_integrals: tuple
    decay: np.ndarray

    @property
    def exp_left(self):
        """exp(-alpha (x_i - a)) accumulated from the same decay factors."""
        e = np.ones(self.decay.size + 1)
        e[1:] = np.cumprod(self.decay)
        return e

    @property
    def exp_right(self):
        e = np.ones(self.decay.size + 1)
        e[:-1] = np.cumprod(self.decay[::-1])[::-1]
        return e


@dataclass
class BoundaryClosure:
    """Closure constants for one operator application."""

    kind: str  # "periodic" or "derivative-data"
    mu: float
    a_r: np.ndarray | float | None = None
    b_l: np.ndarray | float | None = None
    a_0: np.ndarray | float | None = None
    b_0: np.ndarray | float | None = None
    boundary_derivs: tuple | None = None


@dataclass
class BiasedDerivatives:
    """Left-biased (minus) and right-biased (plus) derivative samples."""

    minus: np.ndarray
    plus: np.ndarray


def _sweep_right(jr, decay, uniform):
    """I_R recurrence: I[i] = decay[i-1]*I[i-1] + jr[i], seeded with I[0]=0."""
    out = np.zeros_like(jr)
    if uniform:
        e = float(decay[0])
        out[:] = lfilter([1.0], [1.0, -e], jr, axis=0)
        return out
    acc = np.zeros_like(jr[0])
    for i in range(1, jr.shape[0]):
        acc = decay[i - 1] * acc + jr[i]
        out[i] = acc
    return out


def _sweep_left(jl, decay, uniform):
    """Mirror recurrence: I[i] = decay[i]*I[i+1] + jl[i], I[last]=0."""
    out = np.zeros_like(jl)
    if uniform:
        e = float(decay[0])
        out[:] = lfilter([1.0], [1.0, -e], jl[::-1], axis=0)[::-1]
        return out
    acc = np.zeros_like(jl[0])
    for i in range(jl.shape[0] - 2, -1, -1):
        acc = decay[i] * acc + jl[i]
        out[i] = acc
    return out


def convolve_sweeps(j_right, j_left, decay, uniform=None):
    """Accumulate per-cell integrals into the three convolution arrays."""
    j_right = np.asarray(j_right, dtype=float)
    j_left = np.asarray(j_left, dtype=float)
    decay = np.asarray(decay, dtype=float)
    if j_right.shape != j_left.shape or decay.shape[0] != j_right.shape[0] - 1:
        raise ShapeError("local integral and decay arrays are inconsistent")
    if uniform is None:
        uniform = bool(np.all(decay == decay[0]))
    dcol = decay if j_right.ndim == 1 else decay[:, None]
    i_right = _sweep_right(j_right, dcol, uniform)
    i_left = _sweep_left(j_left, dcol, uniform)
    return ConvolutionState(
        i_left=i_left,
        i_right=i_right,
        i_zero=0.5 * (i_left + i_right),
        local_integrals=(j_left, j_right),
        decay=decay,
    )


def compute_closure(kind, sweeps, operand, alpha, boundary_derivs=None,
                    mu_left=None, mu_right=None):
    """Closure constants for D_L, D_R and D_0 applied to this operand.

    Periodic closures enforce equal operator values at both ends.  The
    derivative-data kind uses the first entry of ``boundary_derivs`` (the
    one-sided slope at each end) for the level-1 constants and zero target
    values for D_0.
    """
    v = np.asarray(operand, dtype=float)
    mu_l = float(sweeps.exp_left[-1]) if mu_left is None else float(mu_left)
    mu_r = float(sweeps.exp_right[0]) if mu_right is None else float(mu_right)
    if not (0.0 <= mu_l < 1.0 and 0.0 <= mu_r < 1.0):
        raise InvalidParameterError(f"decay mu={mu_l} outside [0, 1)")
    if kind == "periodic":
        a_r = sweeps.i_right[-1] / (1.0 - mu_l)
        b_l = sweeps.i_left[0] / (1.0 - mu_r)
        a_0 = sweeps.i_zero[-1] / (1.0 - mu_l)
        b_0 = sweeps.i_zero[0] / (1.0 - mu_r)
        return BoundaryClosure("periodic", mu_l, a_r, b_l, a_0, b_0)
    if kind == "derivative-data":
        if boundary_derivs is None:
            raise IncompleteClosureError(
                "derivative-data closure needs boundary slope data"
            )
        da, db = boundary_derivs
        a_r = v[0] - np.asarray(da)[0] / alpha
        b_l = v[-1] + np.asarray(db)[0] / alpha
        p = v[0] - sweeps.i_zero[0]
        q = v[-1] - sweeps.i_zero[-1]
        den = 1.0 - mu_l * mu_r
        a_0 = (p - mu_r * q) / den
        b_0 = (q - mu_l * p) / den
        return BoundaryClosure("derivative-data", mu_l, a_r, b_l, a_0, b_0,
                               (da, db))
    raise InvalidParameterError(f"unknown closure kind {kind!r}")


def apply_operator(which, operand, closure, sweeps):
    """Evaluate D_L, D_R or D_0 on the operand given its sweeps and closure."""
    v = np.asarray(operand, dtype=float)
    if v.shape != sweeps.i_right.shape:
        raise ShapeError("operand and sweep arrays differ in shape")
    e_l = sweeps.exp_left
    e_r = sweeps.exp_right
    if v.ndim > 1:
        e_l = e_l[:, None]
        e_r = e_r[:, None]
    if which == "D_R":
        return v - sweeps.i_right - closure.a_r * e_l
    if which == "D_L":
        return v - sweeps.i_left - closure.b_l * e_r
    if which == "D_0":
        return v - sweeps.i_zero - closure.a_0 * e_l - closure.b_0 * e_r
    raise InvalidParameterError(f"unknown operator {which!r}")


def boundary_derivative_weights(nodes, order, skip_first=False,
                                skip_last=False, reduced=False):
    """One-sided FD weights for d^m/dx^m at both ends, m = 1..order.

    The slope (m=1) is estimated to accuracy order+1; higher derivatives
    only need accuracy order+1-m, because their contribution to the
    modified sums is damped by alpha^(1-m) - using the shortest adequate
    stencils also keeps the noise amplification of the boundary data low
    (long high-order second-derivative stencils can couple into a growing
    boundary mode).  ``reduced`` shortens the slope stencil by one more
    point and zeroes the m>=2 data entirely: the leanest closure, used on
    boundary-cut lines where the data feedback must stay subcritical.
    ``skip_first`` / ``skip_last`` drop a near-duplicate boundary node
    from the data (its weight is zero) while still evaluating at the
    boundary abscissa.
    """
    nodes = np.asarray(nodes, dtype=float)
    ws_a, ws_b = [], []
    for m in range(1, order + 1):
        if reduced and m >= 2:
            ws_a.append(np.zeros(1))
            ws_b.append(np.zeros(1))
            continue
        accuracy = max(order + 1 - m, 1) if reduced else (
            order + 1 if m == 1 else max(order + 1 - m, 1))
        npts = m + accuracy
        lo = 1 if skip_first else 0
        sub = nodes[lo : lo + npts]
        h = sub[-1] - sub[0]
        w = undivided_diff_coeffs((sub - nodes[0]) / h, m) / h**m
        ws_a.append(np.concatenate([np.zeros(lo), w]))
        hi = nodes.size - 1 if skip_last else nodes.size
        sub = nodes[hi - npts : hi]
        h = sub[-1] - sub[0]
        w = undivided_diff_coeffs((sub - nodes[-1]) / h, m) / h**m
        ws_b.append(np.concatenate([w, np.zeros(nodes.size - hi)]))
    return ws_a, ws_b


def boundary_derivatives_fd(nodes, v, order, weights=None):
    """Estimate d^m v/dx^m at both line ends from the samples themselves."""
    v = np.asarray(v, dtype=float)
    if weights is None:
        weights = boundary_derivative_weights(nodes, order)
    ws_a, ws_b = weights
    da = np.stack([w @ v[: w.size] for w in ws_a])
    db = np.stack([w @ v[-w.size:] for w in ws_b])
    return da, db


class LineKernel:
    """All kernel operators for one line geometry at fixed alpha and order.

    Precomputes the quadrature tables, decay factors and end-point
    exponential profiles once; the per-operand work is then a handful of
    vectorized passes.  ``bc`` is "periodic" or "derivative-data".
    """

    def __init__(self, nodes, bc, alpha, order, lam=None, config=None,
                 data_mode="full"):
        if bc not in ("periodic", "derivative-data"):
            raise InvalidParameterError(f"unknown boundary kind {bc!r}")
        self.data_mode = data_mode
        self.nodes = np.asarray(nodes, dtype=float)
        self.bc = bc
        self.alpha = float(alpha)
        self.order = int(order)
        if self.order not in (1, 2, 3):
            raise InvalidOrderError(f"order must be 1, 2 or 3, got {order}")
        self.config = config or WenoConfig()
        lam = lam if lam is not None else self.config.lam
        self.quad = LineQuadrature(
            self.nodes, bc == "periodic", self.alpha, lam, self.config
        )
        self.widths = self.quad.widths
        self.uniform = self.quad.uniform
        self.decay = np.exp(-self.alpha * self.widths)
        self.exp_left = np.ones(self.nodes.size)
        self.exp_left[1:] = np.cumprod(self.decay)
        self.exp_right = np.ones(self.nodes.size)
        self.exp_right[:-1] = np.cumprod(self.decay[::-1])[::-1]
        span = self.alpha * (self.nodes[-1] - self.nodes[0])
        if span > 700.0:
            # Subnormal-free exact zero; accuracy is unaffected at this range.
            self.exp_left[-1] = 0.0
            self.exp_right[0] = 0.0
        self.mu_left = float(self.exp_left[-1])
        self.mu_right = float(self.exp_right[0])
        self._bd_weights = boundary_derivative_weights(
            self.nodes, self.order,
            skip_first=self.quad.thin_start, skip_last=self.quad.thin_end,
            reduced=(data_mode == "reduced"),
        )

    # -- elementary applications ---------------------------------------------

    def _cols(self, arr, like):
        return arr if like.ndim == 1 else arr[:, None]

    def _dr(self, v, i_right, a_r):
        return v - i_right - a_r * self._cols(self.exp_left, v)

    def _dl(self, v, i_left, b_l):
        return v - i_left - b_l * self._cols(self.exp_right, v)

    def _sweep_r(self, jr):
        d = self.decay if jr.ndim == 1 else self.decay[:, None]
        return _sweep_right(jr, d, self.uniform)

    def _sweep_l(self, jl):
        d = self.decay if jl.ndim == 1 else self.decay[:, None]
        return _sweep_left(jl, d, self.uniform)

    def d_right(self, v, jr, level=1, slope_a=None):
        """D_R with the closure for this line's boundary kind."""
        i_right = self._sweep_r(jr)
        if self.bc == "periodic":
            a_r = i_right[-1] / (1.0 - self.mu_left)
        elif level == 1:
            if slope_a is None:
                raise IncompleteClosureError("D_R level 1 needs the slope at a")
            a_r = v[0] - slope_a / self.alpha
        else:
            a_r = v[0]
        return self._dr(v, i_right, a_r)

    def d_left(self, v, jl, level=1, slope_b=None):
        i_left = self._sweep_l(jl)
        if self.bc == "periodic":
            b_l = i_left[0] / (1.0 - self.mu_right)
        elif level == 1:
            if slope_b is None:
                raise IncompleteClosureError("D_L level 1 needs the slope at b")
            b_l = v[-1] + slope_b / self.alpha
        else:
            b_l = v[-1]
        return self._dl(v, i_left, b_l)

    def d_zero(self, v, jr, jl, c_a=0.0, c_b=0.0):
        """D_0 with periodic closure or prescribed end values c_a, c_b."""
        i_zero = 0.5 * (self._sweep_r(jr) + self._sweep_l(jl))
        e_l = self._cols(self.exp_left, v)
        e_r = self._cols(self.exp_right, v)
        if self.bc == "periodic":
            a_0 = i_zero[-1] / (1.0 - self.mu_left)
            b_0 = i_zero[0] / (1.0 - self.mu_right)
        else:
            p = v[0] - i_zero[0] - c_a
            q = v[-1] - i_zero[-1] - c_b
            den = 1.0 - self.mu_left * self.mu_right
            a_0 = (p - self.mu_right * q) / den
            b_0 = (q - self.mu_left * p) / den
        return v - i_zero - a_0 * e_l - b_0 * e_r

    # -- biased first derivatives ---------------------------------------------

    def biased_derivatives(self, phi, boundary_derivs=None, filters=None,
                           collect=False):
        """Order-k left/right biased derivative arrays at every node.

        The first composition level uses the WENO quadrature; higher levels
        use the cheaper fixed-stencil rule and are damped by the sigma
        filters (supplied or computed from the data).  Non-periodic lines
        need ``boundary_derivs = (da, db)`` with d^m phi at each end for
        m = 1..k; if omitted they are estimated from the samples by
        one-sided differences (outflow-style extrapolation).
        """
        phi = np.asarray(phi, dtype=float)
        if phi.shape[0] != self.nodes.size:
            raise ShapeError(
                f"operand has {phi.shape[0]} nodes, line has {self.nodes.size}"
            )
        k = self.order
        need_sigma = k >= 2 and filters is None
        out = self.quad.local_integrals(
            phi, weno=True, with_sigma=need_sigma, collect=collect
        )
        if need_sigma:
            jr, jl, sig_r, sig_l = out
        else:
            jr, jl = out[0], out[1]
            sig_r, sig_l = (filters if filters is not None else (None, None))
        if self.bc == "periodic":
            minus, plus = self._biased_periodic(phi, jr, jl, sig_r, sig_l)
        else:
            minus, plus = self._biased_nonperiodic(
                phi, jr, jl, sig_r, sig_l, boundary_derivs
            )
        return BiasedDerivatives(minus=minus, plus=plus)

    def _biased_periodic(self, phi, jr, jl, sig_r, sig_l):
        a = self.alpha
        dr1 = self.d_right(phi, jr)
        dl1 = self.d_left(phi, jl)
        if self.order == 1:
            return a * dr1, -a * dl1
        jr2, _ = self.quad.local_integrals(dr1, weno=False, sides="R")
        dr2 = self.d_right(dr1, jr2, level=2)
        _, jl2 = self.quad.local_integrals(dl1, weno=False, sides="L")
        dl2 = self.d_left(dl1, jl2, level=2)
        if self.order == 2:
            return a * (dr1 + sig_r * dr2), -a * (dl1 + sig_l * dl2)
        jr3, jl3 = self.quad.local_integrals(dr2, weno=False)
        dr3 = self.d_right(dr2, jr3, level=3)
        d0r = self.d_zero(dr2, jr3, jl3)
        jr3l, jl3l = self.quad.local_integrals(dl2, weno=False)
        dl3 = self.d_left(dl2, jl3l, level=3)
        d0l = self.d_zero(dl2, jr3l, jl3l)
        minus = a * (dr1 + sig_r * (dr2 + dr3 - d0r))
        plus = -a * (dl1 + sig_l * (dl2 + dl3 - d0l))
        return minus, plus

    def _clamp_slopes(self, phi, da, db):
        """Keep estimated end slopes within reach of the local pair slopes.

        Boundary-cut lines can feed estimation noise back through the
        closure constants; bounding the estimate by nearby one-sided
        slopes saturates that loop without touching smooth data.
        """
        if phi.ndim > 1:
            return da, db
        w = np.diff(self.nodes)
        cap_a = 3.0 * np.max(np.abs(np.diff(phi[:4]) / w[:3])) + 1e-12
        cap_b = 3.0 * np.max(np.abs(np.diff(phi[-4:]) / w[-3:])) + 1e-12
        da = da.copy()
        db = db.copy()
        da[0] = np.clip(da[0], -cap_a, cap_a)
        db[0] = np.clip(db[0], -cap_b, cap_b)
        return da, db

    def _biased_nonperiodic(self, phi, jr, jl, sig_r, sig_l, boundary_derivs):
        a = self.alpha
        k = self.order
        if boundary_derivs is None:
            boundary_derivs = boundary_derivatives_fd(
                self.nodes, phi, k, self._bd_weights
            )
            if self.data_mode == "reduced":
                boundary_derivs = self._clamp_slopes(phi, *boundary_derivs)
        da, db = boundary_derivs
        da = np.asarray(da, dtype=float)
        db = np.asarray(db, dtype=float)
        if da.shape[0] < k or db.shape[0] < k:
            raise IncompleteClosureError(
                f"order {k} needs boundary derivatives m=1..{k}"
            )
        dr1 = self.d_right(phi, jr, level=1, slope_a=da[0])
        dl1 = self.d_left(phi, jl, level=1, slope_b=db[0])
        if k == 1:
            return a * dr1, -a * dl1
        e_l = self._cols(self.exp_left, phi)
        e_r = self._cols(self.exp_right, phi)
        # Exponential corrections that cancel the boundary error terms of the
        # composed operators; signs mirror between the two ends.
        coef2_a = sum((-1.0 / a) ** m * da[m - 1] for m in range(2, k + 1))
        coef2_b = sum((1.0 / a) ** m * db[m - 1] for m in range(2, k + 1))
        phi12 = dr1 - coef2_a * e_l
        phi22 = dl1 - coef2_b * e_r
        jr2, _ = self.quad.local_integrals(phi12, weno=False, sides="R")
        dr2 = self.d_right(phi12, jr2, level=2)
        _, jl2 = self.quad.local_integrals(phi22, weno=False, sides="L")
        dl2 = self.d_left(phi22, jl2, level=2)
        if k == 2:
            return a * (dr1 + sig_r * dr2), -a * (dl1 + sig_l * dl2)
        coef3_a = sum(
            (m - 1) * (-1.0 / a) ** m * da[m - 1] for m in range(2, k + 1)
        )
        coef3_b = sum(
            (m - 1) * (1.0 / a) ** m * db[m - 1] for m in range(2, k + 1)
        )
        phi13 = dr2 + coef3_a * e_l
        phi23 = dl2 + coef3_b * e_r
        jr3, jl3 = self.quad.local_integrals(phi13, weno=False)
        dr3 = self.d_right(phi13, jr3, level=3)
        d0r = self.d_zero(phi13, jr3, jl3)
        jr3l, jl3l = self.quad.local_integrals(phi23, weno=False)
        dl3 = self.d_left(phi23, jl3l, level=3)
        d0l = self.d_zero(phi23, jr3l, jl3l)
        minus = a * (dr1 + sig_r * (dr2 + dr3 - d0r))
        plus = -a * (dl1 + sig_l * (dl2 + dl3 - d0l))
        return minus, plus

    # -- second derivative ------------------------------------------------------

    def second_derivative(self, phi, boundary_xx=None):
        """Truncated composition sum for phi_xx, k terms of -alpha^2 D_0^p."""
        phi = np.asarray(phi, dtype=float)
        w = phi
        total = np.zeros_like(phi)
        for p in range(1, self.order + 1):
            jr, jl = self.quad.local_integrals(w, weno=False)
            if self.bc == "periodic":
                w = self.d_zero(w, jr, jl)
            else:
                if p == 1:
                    if boundary_xx is None:
                        raise IncompleteClosureError(
                            "non-periodic second derivative needs end values"
                        )
                    c_a = -boundary_xx[0] / self.alpha**2
                    c_b = -boundary_xx[1] / self.alpha**2
                else:
                    c_a = c_b = 0.0
                w = self.d_zero(w, jr, jl, c_a, c_b)
            total += w
        return -self.alpha**2 * total


def biased_derivatives_periodic(line, phi, filters=None):
    """Module-level convenience wrapper for periodic lines."""
    return line.biased_derivatives(phi, filters=filters)


def biased_derivatives_nonperiodic(line, phi, boundary_derivs, filters=None):
    """Module-level convenience wrapper for derivative-data lines."""
    return line.biased_derivatives(phi, boundary_derivs=boundary_derivs,
                                   filters=filters)
