"""Uniform-grid domains, nodal scalar fields, and discrete differential operators.

Three domain kinds are supported: an interval (0, L), an axis-aligned
rectangle (0, Lx) x (0, Ly), and a ball of radius R reduced to its radial
profile on [0, R] with the symmetry condition u'(0) = 0.  All grids are
uniform.  Gradients are evaluated at staggered midpoints (cell centers),
so that the flux |grad u|^(p-2) grad u lives on cells and its divergence
is taken back to nodes.  The nodal operator assembled here is exactly the
gradient of the discrete p-Dirichlet energy, which keeps the solvers, the
weak-residual grader, and the comparison arguments mutually consistent.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

__all__ = [
    "MeshError",
    "Domain",
    "ScalarField",
    "make_weight",
    "sup_norm",
    "grad_magnitude",
    "nodal_gradient_magnitude",
    "sup_grad_norm",
    "weak_residual",
    "node_masses",
    "field_to_csv",
    "field_from_csv",
    "field_to_json",
    "field_from_json",
]

_KINDS = ("interval", "rectangle", "ball")


class MeshError(ValueError):
    """Invalid domain geometry or field data."""


@dataclass(frozen=True)
class Domain:
    """A uniformly discretized interval, rectangle, or radial ball.

    Attributes
    ----------
    kind : one of "interval", "rectangle", "ball".
    extents : (L,), (Lx, Ly) or (R,) depending on kind; dimensionless.
    dimension : ambient space dimension N (1 for interval sanity cases,
        2 for rectangles, >= 2 for balls).
    cells : number of grid cells per axis; node count is cells + 1.
    """

    kind: str
    extents: tuple[float, ...]
    dimension: int
    cells: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise MeshError(f"unknown domain kind {self.kind!r}")
        if any(e <= 0 for e in self.extents):
            raise MeshError("extents must be positive")
        if any(c < 2 for c in self.cells):
            raise MeshError("need at least 3 nodes (2 cells) per axis")
        if self.kind == "ball" and self.dimension < 2:
            raise MeshError("ball domains require ambient dimension >= 2")
        if self.kind == "rectangle" and self.dimension != 2:
            raise MeshError("rectangle domains are 2-dimensional")

    # -- constructors -------------------------------------------------

    @staticmethod
    def interval(length: float = 1.0, cells: int = 256) -> "Domain":
        return Domain("interval", (float(length),), 1, (int(cells),))

    @staticmethod
    def rectangle(lengths=(1.0, 1.0), cells=(64, 64)) -> "Domain":
        lx, ly = lengths
        cx, cy = cells
        return Domain("rectangle", (float(lx), float(ly)), 2, (int(cx), int(cy)))

    @staticmethod
    def ball(radius: float = 1.0, dimension: int = 2, cells: int = 256) -> "Domain":
        return Domain("ball", (float(radius),), int(dimension), (int(cells),))

    # -- geometry -----------------------------------------------------

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(e / c for e, c in zip(self.extents, self.cells))

    @property
    def h(self) -> float:
        return max(self.spacing)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c + 1 for c in self.cells)

    @property
    def cell_shape(self) -> tuple[int, ...]:
        return tuple(self.cells)

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(
            np.linspace(0.0, e, c + 1) for e, c in zip(self.extents, self.cells)
        )

    @cached_property
    def cell_axes(self) -> tuple[np.ndarray, ...]:
        return tuple(0.5 * (ax[:-1] + ax[1:]) for ax in self.axes)

    def coords(self) -> tuple[np.ndarray, ...]:
        """Node coordinate arrays broadcast to the grid shape."""
        if self.kind == "rectangle":
            return tuple(np.meshgrid(*self.axes, indexing="ij"))
        return (self.axes[0],)

    def cell_coords(self) -> tuple[np.ndarray, ...]:
        if self.kind == "rectangle":
            return tuple(np.meshgrid(*self.cell_axes, indexing="ij"))
        return (self.cell_axes[0],)

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        if self.kind == "rectangle":
            mask[0, :] = mask[-1, :] = True
            mask[:, 0] = mask[:, -1] = True
        elif self.kind == "ball":
            mask[-1] = True  # only r = R; r = 0 is interior by symmetry
        else:
            mask[0] = mask[-1] = True
        mask.setflags(write=False)
        return mask

    @cached_property
    def interior_flat(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_mask.ravel())

    @cached_property
    def masses(self) -> np.ndarray:
        """Nodal quadrature weights (trapezoid; exact control volumes on balls)."""
        if self.kind == "rectangle":
            mx = _axis_masses(self.axes[0], self.spacing[0])
            my = _axis_masses(self.axes[1], self.spacing[1])
            m = np.outer(mx, my)
        elif self.kind == "ball":
            r = self.axes[0]
            h = self.spacing[0]
            n = self.dimension
            hi = np.minimum(r + 0.5 * h, self.extents[0])
            lo = np.maximum(r - 0.5 * h, 0.0)
            m = (hi**n - lo**n) / n
        else:
            m = _axis_masses(self.axes[0], self.spacing[0])
        m.setflags(write=False)
        return m

    @cached_property
    def cell_weights(self) -> np.ndarray:
        """Cell measure weights for the energy quadrature (1D kinds only)."""
        if self.kind == "ball":
            r = self.axes[0]
            n = self.dimension
            w = (r[1:] ** n - r[:-1] ** n) / n
        elif self.kind == "interval":
            w = np.full(self.cells[0], self.spacing[0])
        else:
            raise MeshError("cell_weights is defined for 1D kinds only")
        w.setflags(write=False)
        return w

    # -- serialization ------------------------------------------------

    def descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "extents": list(self.extents),
            "dimension": self.dimension,
            "cells": list(self.cells),
        }

    @staticmethod
    def from_descriptor(d: dict) -> "Domain":
        return Domain(
            d["kind"],
            tuple(float(e) for e in d["extents"]),
            int(d["dimension"]),
            tuple(int(c) for c in d["cells"]),
        )


def _axis_masses(ax: np.ndarray, h: float) -> np.ndarray:
    m = np.full(ax.shape, h)
    m[0] = m[-1] = 0.5 * h
    return m


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real nodal (or cell-centered) values on a Domain.

    Fields are immutable value snapshots: the values array is copied on
    construction and marked read-only, so instances are safe to share
    between threads.  A Dirichlet-flagged field has its boundary nodes
    forced to exactly zero.
    """

    domain: Domain
    values: np.ndarray
    dirichlet: bool = False
    location: str = "node"

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        expected = self.domain.shape if self.location == "node" else self.domain.cell_shape
        if self.location not in ("node", "cell"):
            raise MeshError(f"unknown field location {self.location!r}")
        if v.shape != expected:
            raise MeshError(f"values shape {v.shape} != grid shape {expected}")
        if not np.all(np.isfinite(v)):
            raise MeshError("field values must be finite")
        if self.dirichlet:
            if self.location != "node":
                raise MeshError("only nodal fields can be Dirichlet-flagged")
            v[self.domain.boundary_mask] = 0.0
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @staticmethod
    def zeros(dom: Domain, dirichlet: bool = True) -> "ScalarField":
        return ScalarField(dom, np.zeros(dom.shape), dirichlet=dirichlet)

    @staticmethod
    def from_function(dom: Domain, fn: Callable, dirichlet: bool = False) -> "ScalarField":
        vals = np.asarray(fn(*dom.coords()), dtype=float)
        vals = np.broadcast_to(vals, dom.shape).copy()
        return ScalarField(dom, vals, dirichlet=dirichlet)

    @staticmethod
    def constant(dom: Domain, value: float) -> "ScalarField":
        return ScalarField(dom, np.full(dom.shape, float(value)))

    def with_values(self, values: np.ndarray, dirichlet: bool | None = None) -> "ScalarField":
        flag = self.dirichlet if dirichlet is None else dirichlet
        return ScalarField(self.domain, values, dirichlet=flag, location=self.location)


def make_weight(dom: Domain, fn_or_value) -> ScalarField:
    """Sample a nonnegative weight on the nodes and validate it.

    Accepts a callable of the node coordinates or a constant.  The weight
    must be nonnegative and not identically zero.
    """
    if callable(fn_or_value):
        w = ScalarField.from_function(dom, fn_or_value)
    else:
        w = ScalarField.constant(dom, float(fn_or_value))
    if np.any(w.values < 0):
        raise MeshError("weight must be nonnegative")
    if np.max(w.values) <= 0:
        raise MeshError("weight must not be identically zero")
    return w


# ---------------------------------------------------------------------------
# norms and gradients
# ---------------------------------------------------------------------------


def sup_norm(f: ScalarField) -> float:
    """Maximum of |f| over all nodes (boundary included)."""
    return float(np.max(np.abs(f.values)))


def grad_magnitude(f: ScalarField) -> ScalarField:
    """Cell-centered magnitude of the discrete gradient.

    Midpoint differences per axis; for the ball, |f'(r)| on cell centers.
    The returned field lives on the cell-center grid.
    """
    dom = f.domain
    v = f.values
    if dom.kind == "rectangle":
        hx, hy = dom.spacing
        gx = 0.5 * ((v[1:, :-1] - v[:-1, :-1]) + (v[1:, 1:] - v[:-1, 1:])) / hx
        gy = 0.5 * ((v[:-1, 1:] - v[:-1, :-1]) + (v[1:, 1:] - v[1:, :-1])) / hy
        mag = np.sqrt(gx * gx + gy * gy)
    else:
        mag = np.abs(np.diff(v)) / dom.spacing[0]
    return ScalarField(dom, mag, location="cell")


def nodal_gradient_magnitude(f: ScalarField) -> ScalarField:
    """Gradient magnitude interpolated to the nodes.

    Central differences in the interior, second-order one-sided stencils
    on the boundary rows.  Used to evaluate gradient-dependent right-hand
    sides nodewise.
    """
    dom = f.domain
    v = f.values
    if dom.kind == "rectangle":
        hx, hy = dom.spacing
        gx = np.gradient(v, hx, axis=0, edge_order=2)
        gy = np.gradient(v, hy, axis=1, edge_order=2)
        mag = np.sqrt(gx * gx + gy * gy)
    else:
        mag = np.abs(np.gradient(v, dom.spacing[0], edge_order=2))
    return ScalarField(dom, mag)


def sup_grad_norm(f: ScalarField) -> float:
    """Discrete stand-in for the sup norm of the gradient.

    Takes the maximum over cell-centered magnitudes together with
    second-order one-sided estimates at the boundary nodes, where the
    gradient of a torsion-type profile attains its maximum.
    """
    cells = grad_magnitude(f).values
    nodal = nodal_gradient_magnitude(f).values
    return float(max(np.max(cells), np.max(nodal[f.domain.boundary_mask])))


def node_masses(dom: Domain) -> np.ndarray:
    return dom.masses


# ---------------------------------------------------------------------------
# discrete p-Dirichlet energy, its gradient (the flux-form operator), Hessian
# ---------------------------------------------------------------------------


def _eta(g2: np.ndarray, p: float, delta: float) -> np.ndarray:
    base = g2 + delta * delta
    with np.errstate(divide="ignore"):
        e = base ** ((p - 2.0) / 2.0)
    if delta == 0.0 and p < 2.0:
        e = np.where(g2 == 0.0, 0.0, e)  # flux sign(g)|g|^{p-1} -> 0 as g -> 0
    return e


def dirichlet_energy(dom: Domain, v: np.ndarray, p: float, delta: float) -> float:
    """Discrete (1/p) * integral of (|grad v|^2 + delta^2)^{p/2}."""
    if dom.kind == "rectangle":
        hx, hy = dom.spacing
        w = hx * hy / 4.0
        total = 0.0
        for s1, s2, sl in _quadrants(dom):
            u0, uxn, uyn = v[sl[0]], v[sl[1]], v[sl[2]]
            gx = (uxn - u0) * (s1 / hx)
            gy = (uyn - u0) * (s2 / hy)
            g2 = gx * gx + gy * gy
            total += w * np.sum((g2 + delta * delta) ** (p / 2.0))
        return total / p
    h = dom.spacing[0]
    g = np.diff(v) / h
    return float(np.sum(dom.cell_weights * (g * g + delta * delta) ** (p / 2.0)) / p)


def flux_gradient(dom: Domain, v: np.ndarray, p: float, delta: float) -> np.ndarray:
    """Gradient of the discrete p-Dirichlet energy with respect to nodal values.

    Row i equals the weak form <|grad v|^{p-2} grad v, grad phi_i> for the
    hat-type test function at node i, under the staggered quadrature.
    """
    g_out = np.zeros(dom.shape)
    if dom.kind == "rectangle":
        hx, hy = dom.spacing
        w = hx * hy / 4.0
        for s1, s2, sl in _quadrants(dom):
            u0, uxn, uyn = v[sl[0]], v[sl[1]], v[sl[2]]
            gx = (uxn - u0) * (s1 / hx)
            gy = (uyn - u0) * (s2 / hy)
            eta = _eta(gx * gx + gy * gy, p, delta)
            fx = w * eta * gx * (s1 / hx)
            fy = w * eta * gy * (s2 / hy)
            g_out[sl[0]] -= fx + fy
            g_out[sl[1]] += fx
            g_out[sl[2]] += fy
        return g_out
    h = dom.spacing[0]
    g = np.diff(v) / h
    t = dom.cell_weights * _eta(g * g, p, delta) * g / h
    g_out[:-1] -= t
    g_out[1:] += t
    return g_out


def _quadrants(dom: Domain):
    nx, ny = dom.cells
    for s1 in (1, -1):
        for s2 in (1, -1):
            xs = slice(0, nx) if s1 == 1 else slice(1, nx + 1)
            xn = slice(1, nx + 1) if s1 == 1 else slice(0, nx)
            ys = slice(0, ny) if s2 == 1 else slice(1, ny + 1)
            yn = slice(1, ny + 1) if s2 == 1 else slice(0, ny)
            yield s1, s2, ((xs, ys), (xn, ys), (xs, yn))


def residual_vector(
    dom: Domain, v: np.ndarray, rhs: np.ndarray, p: float, delta: float
) -> np.ndarray:
    """Nodal residual of -div(|grad v|^{p-2} grad v) = rhs in weak flux form.

    Boundary rows are zeroed (Dirichlet test functions vanish there).
    """
    r = flux_gradient(dom, v, p, delta) - dom.masses * rhs
    r[dom.boundary_mask] = 0.0
    return r


def hessian_banded(dom: Domain, v: np.ndarray, p: float, delta: float) -> np.ndarray:
    """Tridiagonal Hessian of the energy on interior unknowns (interval/ball).

    Returned in scipy solve_banded (1, 1) layout.
    """
    h = dom.spacing[0]
    g = np.diff(v) / h
    g2 = g * g
    base = g2 + delta * delta
    if p == 2.0:
        stiff = np.ones_like(g2)
    else:
        if delta <= 0.0:
            raise ValueError("Hessian assembly requires delta > 0 for p != 2")
        stiff = base ** ((p - 2.0) / 2.0) + (p - 2.0) * base ** ((p - 4.0) / 2.0) * g2
    kappa = dom.cell_weights * stiff / (h * h)
    # interior unknowns: ball keeps node r=0, interval drops both ends
    if dom.kind == "ball":
        diag = np.empty(dom.cells[0])
        diag[0] = kappa[0]
        diag[1:] = kappa[:-1] + kappa[1:]
        off = -kappa[:-1]
        m = dom.cells[0]
    else:
        diag = kappa[:-1] + kappa[1:]
        off = -kappa[1:-1]
        m = dom.cells[0] - 1
    ab = np.zeros((3, m))
    ab[1, :] = diag
    ab[0, 1:] = off
    ab[2, :-1] = off
    return ab


def hessian_csr(dom: Domain, v: np.ndarray, p: float, delta: float):
    """Sparse Hessian of the energy restricted to interior unknowns (rectangle)."""
    from scipy.sparse import coo_matrix

    nx, ny = dom.cells
    hx, hy = dom.spacing
    w = hx * hy / 4.0
    nyn = ny + 1
    rows, cols, vals = [], [], []
    ii = np.arange(nx + 1)
    jj = np.arange(ny + 1)
    for s1, s2, sl in _quadrants(dom):
        u0, uxn, uyn = v[sl[0]], v[sl[1]], v[sl[2]]
        gx = (uxn - u0) * (s1 / hx)
        gy = (uyn - u0) * (s2 / hy)
        g2 = gx * gx + gy * gy
        base = g2 + delta * delta
        if p == 2.0:
            eta = np.ones_like(base)
            chi = np.zeros_like(base)
        else:
            if delta <= 0.0:
                raise ValueError("Hessian assembly requires delta > 0 for p != 2")
            eta = base ** ((p - 2.0) / 2.0)
            chi = (p - 2.0) * base ** ((p - 4.0) / 2.0)
        s11 = w * (eta + chi * gx * gx)
        s22 = w * (eta + chi * gy * gy)
        s12 = w * chi * gx * gy
        c = s1 * s2
        i0 = ii[sl[0][0]][:, None] * nyn + jj[sl[0][1]][None, :]
        ixn = ii[sl[1][0]][:, None] * nyn + jj[sl[1][1]][None, :]
        iyn = ii[sl[2][0]][:, None] * nyn + jj[sl[2][1]][None, :]
        a11 = s11 / (hx * hx)
        a22 = s22 / (hy * hy)
        a12 = s12 * c / (hx * hy)
        for r, cc, vv in (
            (i0, i0, a11 + a22 + 2.0 * a12),
            (ixn, ixn, a11),
            (iyn, iyn, a22),
            (i0, ixn, -a11 - a12),
            (ixn, i0, -a11 - a12),
            (i0, iyn, -a22 - a12),
            (iyn, i0, -a22 - a12),
            (ixn, iyn, a12),
            (iyn, ixn, a12),
        ):
            rows.append(r.ravel())
            cols.append(cc.ravel())
            vals.append(np.broadcast_to(vv, r.shape).ravel())
    n_all = (nx + 1) * nyn
    H = coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_all, n_all),
    ).tocsr()
    keep = dom.interior_flat
    return H[keep][:, keep]


# ---------------------------------------------------------------------------
# weak residual grading
# ---------------------------------------------------------------------------


def weak_residual(u: ScalarField, rhs: ScalarField, p: float, mode: str = "equation") -> float:
    """Grade u against -div(|grad u|^{p-2} grad u) = rhs over the hat-function basis.

    mode "equation" returns the largest absolute defect, mode "sub" the
    largest violation of the <= inequality (sub-solution check), mode
    "super" the largest violation of >=.  Fluxes are evaluated without
    regularization.
    """
    val, _ = weak_residual_detail(u, rhs, p, mode)
    return val


def weak_residual_detail(
    u: ScalarField, rhs: ScalarField, p: float, mode: str = "equation"
) -> tuple[float, int]:
    if p <= 1:
        raise ValueError(f"weak residual requires p > 1, got p = {p}")
    if u.values.shape != rhs.values.shape:
        raise MeshError("field and rhs live on different grids")
    dom = u.domain
    r = residual_vector(dom, u.values, rhs.values, p, delta=0.0)
    ri = r.ravel()[dom.interior_flat]
    if mode == "equation":
        k = int(np.argmax(np.abs(ri)))
        return float(abs(ri[k])), int(dom.interior_flat[k])
    if mode == "sub":
        k = int(np.argmax(ri))
        return float(max(ri[k], 0.0)), int(dom.interior_flat[k])
    if mode == "super":
        k = int(np.argmin(ri))
        return float(max(-ri[k], 0.0)), int(dom.interior_flat[k])
    raise ValueError(f"unknown weak residual mode {mode!r}")


# ---------------------------------------------------------------------------
# serialization (CSV rows per node, JSON envelope)
# ---------------------------------------------------------------------------

_FMT = "%.17g"


def _coord_columns(f: ScalarField) -> tuple[list[str], list[np.ndarray]]:
    dom = f.domain
    coords = dom.coords() if f.location == "node" else dom.cell_coords()
    if dom.kind == "rectangle":
        return ["x", "y"], [c.ravel() for c in coords]
    name = "r" if dom.kind == "ball" else "x"
    return [name], [coords[0].ravel()]


def field_to_csv(f: ScalarField, path) -> None:
    """One row per node: coordinates then value, 17 significant digits."""
    names, cols = _coord_columns(f)
    vals = f.values.ravel()
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(names + ["value"])
        for i in range(vals.size):
            wr.writerow([_FMT % c[i] for c in cols] + [_FMT % vals[i]])


def field_from_csv(path, domain: Domain, dirichlet: bool = False, location: str = "node") -> ScalarField:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        vcol = header.index("value")
        vals = np.array([float(row[vcol]) for row in rd])
    shape = domain.shape if location == "node" else domain.cell_shape
    return ScalarField(domain, vals.reshape(shape), dirichlet=dirichlet, location=location)


def field_to_json(f: ScalarField) -> dict:
    """JSON envelope {domain, h, values} preserving full precision."""
    return {
        "domain": f.domain.descriptor(),
        "h": f.domain.h,
        "dirichlet": f.dirichlet,
        "location": f.location,
        "values": f.values.ravel().tolist(),
    }


def field_from_json(d: dict) -> ScalarField:
    dom = Domain.from_descriptor(d["domain"])
    shape = dom.shape if d.get("location", "node") == "node" else dom.cell_shape
    vals = np.asarray(d["values"], dtype=float).reshape(shape)
    return ScalarField(dom, vals, dirichlet=bool(d.get("dirichlet", False)), location=d.get("location", "node"))
