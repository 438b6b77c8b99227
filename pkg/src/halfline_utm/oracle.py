"""Independent finite-difference reference solver and manufactured solutions.

All nine families fit the mass-operator form M(t) u_t = A(t) u + f on a
truncated half-line: centered second-order differences in x, trapezoidal
(Crank-Nicolson) stepping in t, boundary rows imposing the given g_j on the
left and homogeneous conditions at the far end.  The mass operator keeps the
spectrum bounded, so the implicit banded solve per step is cheap and stable.

Nothing here touches the contour machinery: this is the cross-check path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from . import expr as ex
from .assembly import ProblemSpec
from .families import OperatorFamily
from .grids import SolutionGrid

__all__ = ["Grid", "SolutionGrid", "OracleError", "fd_solve",
           "manufacture_forcing", "ManufacturedProblem", "manufactured_spec",
           "compare"]


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform space-time grid: n_x points on [0, x_max], n_t steps of dt."""

    x_max: float
    n_x: int
    dt: float
    n_t: int

    def __post_init__(self):
        if self.n_x < 8:
            raise ValueError("need at least 8 spatial points")
        if self.dt <= 0 or self.n_t < 1:
            raise ValueError("need a positive time step count")

    @property
    def xs(self):
        return np.linspace(0.0, self.x_max, self.n_x)

    @property
    def ts(self):
        return self.dt * np.arange(self.n_t + 1)

    @property
    def dx(self):
        return self.x_max / (self.n_x - 1)

    def refined(self) -> "Grid":
        return Grid(self.x_max, 2 * (self.n_x - 1) + 1, 0.5 * self.dt, 2 * self.n_t)


def _stencil_rows(order):
    """Centered interior stencil (offsets, coeffs/h^order) for d^order/dx^order."""
    table = {
        1: ((-1, 0, 1), (-0.5, 0.0, 0.5)),
        2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
        4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
        6: ((-3, -2, -1, 0, 1, 2, 3), (1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0)),
    }
    return table[order]


def _banded_template(order, n, h, bw):
    """Banded storage (2bw+1, n) of the interior centered difference D_order.

    Rows outside the interior are left zero; they get boundary rows anyway.
    """
    ab = np.zeros((2 * bw + 1, n))
    offsets, coeffs = _stencil_rows(order)
    scale = h ** (-order)
    half = max(abs(o) for o in offsets)
    # banded convention: ab[bw + i - j, j] = a[i, j]
    for i in range(half, n - half):
        for off, c in zip(offsets, coeffs):
            j = i + off
            ab[bw + i - j, j] += c * scale
    return ab


def _identity_banded(n, bw):
    ab = np.zeros((2 * bw + 1, n))
    ab[bw, :] = 1.0
    return ab


def _left_bc_row(order, h):
    """One-sided second-order stencil for d^order u/dx^order at x = 0."""
    if order == 0:
        return (0,), (1.0,)
    if order == 1:
        return (0, 1, 2), (-1.5 / h, 2.0 / h, -0.5 / h)
    if order == 2:
        return (0, 1, 2, 3), (2.0 / h ** 2, -5.0 / h ** 2, 4.0 / h ** 2, -1.0 / h ** 2)
    raise ValueError(order)


def _set_row(ab, bw, i, cols, vals, n):
    lo, hi = max(0, i - bw), min(n, i + bw + 1)
    for j in range(lo, hi):
        ab[bw + i - j, j] = 0.0
    for j, v in zip(cols, vals):
        ab[bw + i - j, j] = v


_FORMS = {
    # family id -> (mass terms, rhs operator terms); each term is
    # (derivative order or "I", coefficient name, sign)
    1: ((("I", None, 1.0), (2, "alpha", -1.0)),
        ((2, "beta", 1.0), ("I", "gamma", -1.0))),
    2: ((("I", None, 1.0), (2, "alpha", -1.0)),
        ((1, "beta", -1.0),)),
    3: ((("I", None, 1.0), (4, "alpha", 1.0)),
        ((4, "beta", -1.0), ("I", "gamma", -1.0))),
    4: ((("I", None, 1.0), (4, "alpha", 1.0)),
        ((2, "beta", 1.0),)),
    5: ((("I", None, 1.0), (4, "alpha", 1.0), (2, "beta", -1.0)),
        ((4, "gamma", -1.0),)),
    6: ((("I", None, 1.0), (4, "alpha", 1.0), (2, "beta", -1.0)),
        ((1, "gamma", -1.0),)),
    7: ((("I", None, 1.0), (6, "alpha", -1.0), (4, "beta", 1.0), (2, "gamma", -1.0)),
        ((2, "delta", 1.0),)),
    8: ((("I", None, 1.0), (6, "alpha", -1.0)),
        ((6, "beta", 1.0), ("I", "gamma", -1.0))),
}


def _family_form(spec: ProblemSpec):
    fid = spec.family.id
    if fid != 9:
        return _FORMS[fid]
    nu = spec.family.nu
    s = (-1.0) ** nu
    mass = (("I", None, 1.0), (2 * nu, "alpha", s))
    rhs = ((2 * nu, "beta", -s), ("I", "gamma", -1.0))
    return mass, rhs


def fd_solve(spec: ProblemSpec, grid: Grid, estimate: bool = True,
             _allow_retry: bool = True) -> SolutionGrid:
    """Time-march the problem on the grid; Crank-Nicolson in t.

    With estimate=True the solve is repeated on a (dx/2, dt/2) grid and the
    Richardson error estimate |coarse - fine|/3 (second-order scheme) is
    attached to the metadata; the returned values are the fine ones restricted
    to the requested grid.
    """
    values = _march(spec, grid, _allow_retry)
    meta = {"method": "finite-difference", "scheme": "crank-nicolson",
            "x_max": grid.x_max, "dx": grid.dx, "dt": grid.dt}
    if estimate:
        fine = _march(spec, grid.refined(), _allow_retry)
        fine_on_coarse = fine[::2, ::2]
        err = float(np.max(np.abs(values - fine_on_coarse))) / 3.0
        values = fine_on_coarse
        meta["richardson_error"] = err
    return SolutionGrid(grid.xs, grid.ts, values, meta)


def _march(spec: ProblemSpec, grid: Grid, allow_retry: bool):
    fam = spec.family
    nu = fam.spatial_order // 2
    n = grid.n_x
    h = grid.dx
    if n < 2 * fam.spatial_order + 4:
        raise OracleError(f"grid too coarse: n_x = {n} for spatial order {fam.spatial_order}")
    bw = nu
    mass_terms, rhs_terms = _family_form(spec)
    orders = sorted({o for o, _, _ in mass_terms + rhs_terms if o != "I"})
    D = {o: _banded_template(o, n, h, bw) for o in orders}
    I = _identity_banded(n, bw)

    def banded(terms, t):
        ab = np.zeros((2 * bw + 1, n))
        for order, cname, sign in terms:
            coef = sign if cname is None else sign * float(
                ex.evaluate(spec.coeffs[cname], {"t": t}))
            ab += coef * (I if order == "I" else D[order])
        return ab

    def matvec(ab, u):
        # ab[bw + i - j, j] = a[i, j]; accumulate per offset o = j - i
        out = np.zeros(n)
        for o in range(-bw, bw + 1):
            row = ab[bw - o]
            if o >= 0:
                out[:n - o] += row[o:] * u[o:]
            else:
                out[-o:] += row[:n + o] * u[:n + o]
        return out

    # boundary rows: given data on the left, homogeneous on the right
    given = spec.given_orders()
    left_rows = [(i, *_left_bc_row(j, h), spec.boundary[j])
                 for i, j in enumerate(given)]
    right_rows = []
    for i, order in enumerate(range(nu)):
        cols, vals = _left_bc_row(order, h)
        cols = tuple(n - 1 - c for c in cols)
        vals = tuple(v * (-1.0) ** order for v in vals)
        right_rows.append((n - 1 - i, cols, vals))

    xs = grid.xs
    u = np.broadcast_to(np.asarray(
        ex.evaluate(spec.u0, {"x": xs}), dtype=float), xs.shape).copy()
    out = np.empty((n, grid.n_t + 1))
    out[:, 0] = u
    cap = 1e10 * (np.max(np.abs(u)) + 1.0)
    for step in range(grid.n_t):
        t0 = step * grid.dt
        t_mid = t0 + 0.5 * grid.dt
        t1 = t0 + grid.dt
        M = banded(mass_terms, t_mid)
        A = banded(rhs_terms, t_mid)
        L = M - 0.5 * grid.dt * A
        rhs = matvec(M + 0.5 * grid.dt * A, u)
        if spec.forcing is not None:
            fv = ex.evaluate(spec.forcing, {"x": xs, "t": t_mid})
            rhs = rhs + grid.dt * np.broadcast_to(np.asarray(fv, dtype=float), xs.shape)
        for i, cols, vals, g in left_rows:
            _set_row(L, bw, i, cols, vals, n)
            rhs[i] = float(ex.evaluate(g, {"t": t1}))
        for i, cols, vals in right_rows:
            _set_row(L, bw, i, cols, vals, n)
            rhs[i] = 0.0
        try:
            u = solve_banded((bw, bw), L, rhs)
        except np.linalg.LinAlgError as exc:
            raise OracleError(f"singular banded matrix at t = {t1:.6g} "
                              f"(bandwidth {bw})") from exc
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > cap:
            if allow_retry:
                finer = Grid(grid.x_max, grid.n_x, grid.dt / 2.0, grid.n_t * 2)
                return _march(spec, finer, False)[:, ::2]
            raise OracleError(f"instability detected at t = {t1:.6g}: growth beyond 1e10")
        out[:, step + 1] = u
    return out


@dataclass
class ManufacturedProblem:
    """Forcing and consistent data generated from a chosen exact solution."""

    u_star: ex.Expression
    forcing: ex.Expression
    u0: ex.Expression
    boundary: dict = field(default_factory=dict)


def _node_count(e):
    if isinstance(e, (ex.Num, ex.Const, ex.Var)):
        return 1
    if isinstance(e, (ex.Neg, ex.Func)):
        return 1 + _node_count(e.a)
    return 1 + _node_count(e.a) + _node_count(e.b)


def manufacture_forcing(family: OperatorFamily, coeffs: dict, u_star,
                        max_nodes: int = 200_000) -> ManufacturedProblem:
    """f := (operator applied to u_star), via exact symbolic differentiation.

    Also emits the consistent data u0 = u_star(., 0) and g_j(t) =
    d^j u_star/dx^j at x = 0 for every boundary order the family consumes.
    """
    u = u_star if isinstance(u_star, ex.Expression) else ex.parse(u_star)
    coeffs = {k: (v if isinstance(v, ex.Expression) else
                  ex.parse(v) if isinstance(v, str) else ex.Num(float(v)))
              for k, v in coeffs.items()}

    dx_cache = {0: u}

    def ddx(order):
        if order not in dx_cache:
            dx_cache[order] = ex.differentiate(ddx(order - 1), "x")
        return dx_cache[order]

    spec_form = _FORMS.get(family.id)
    if spec_form is None:  # family 9
        nu = family.nu
        s = (-1.0) ** nu
        spec_form = ((("I", None, 1.0), (2 * nu, "alpha", s)),
                     ((2 * nu, "beta", -s), ("I", "gamma", -1.0)))
    mass_terms, rhs_terms = spec_form

    # f = sum mass_terms applied to u_t  -  sum rhs_terms applied to u
    ut_pieces = []
    for order, cname, sign in mass_terms:
        base = u if order == "I" else ddx(order)
        piece = ex.differentiate(base, "t")
        coef = ex.Num(sign) if cname is None else ex.simplify(
            ex.Mul(ex.Num(sign), coeffs[cname]))
        ut_pieces.append(ex.Mul(coef, piece))
    rhs_pieces = []
    for order, cname, sign in rhs_terms:
        base = u if order == "I" else ddx(order)
        coef = ex.Num(sign) if cname is None else ex.simplify(
            ex.Mul(ex.Num(sign), coeffs[cname]))
        rhs_pieces.append(ex.Mul(coef, base))
    f = None
    for p in ut_pieces:
        f = p if f is None else ex.Add(f, p)
    for p in rhs_pieces:
        f = ex.Sub(f, p)
    f = ex.simplify(f)
    count = _node_count(f)
    if count > max_nodes:
        raise OracleError(f"manufactured forcing expression too large: {count} nodes")

    u0 = ex.substitute(u, "t", 0.0)
    boundary = {j: ex.substitute(ddx(j), "x", 0.0) for j in range(family.n_boundary)}
    return ManufacturedProblem(u, f, u0, boundary)


def manufactured_spec(family: OperatorFamily, coeffs: dict, u_star,
                      t_max: float = 1.0, bc: str = "dirichlet") -> ProblemSpec:
    """ProblemSpec with forcing and data consistent with ``u_star``."""
    m = manufacture_forcing(family, coeffs, u_star)
    boundary = dict(m.boundary)
    if family.id == 1 and bc == "neumann":
        u = m.u_star
        boundary = {1: ex.substitute(ex.differentiate(u, "x"), "x", 0.0)}
    return ProblemSpec(family=family, coeffs=coeffs, u0=m.u0, boundary=boundary,
                       forcing=m.forcing, t_max=t_max, bc=bc)


def compare(utm: SolutionGrid, fd: SolutionGrid, corner: float = 0.01,
            x_half: bool = True) -> dict:
    """Relative L-inf and L2 discrepancy over the interior comparison region.

    Region: x <= x_max/2 (x_max from the oracle grid), excluding the corner
    layer x + t < ``corner`` where compatibility-order effects concentrate.
    """
    if utm.xs.shape != fd.xs.shape or utm.ts.shape != fd.ts.shape or \
            not np.allclose(utm.xs, fd.xs) or not np.allclose(utm.ts, fd.ts):
        raise OracleError("grid mismatch between the two solutions")
    a = np.real(utm.values)
    b = np.real(fd.values)
    X, T = np.meshgrid(utm.xs, utm.ts, indexing="ij")
    x_max = fd.meta.get("x_max", float(np.max(utm.xs)))
    mask = (X + T >= corner)
    if x_half:
        mask &= (X <= 0.5 * x_max)
    diff = np.abs(a - b)[mask]
    scale = float(np.max(np.abs(b[mask]))) if np.any(mask) else 0.0
    if scale == 0.0:
        linf = float(np.max(diff)) if diff.size else 0.0
        return {"linf": linf, "l2": linf, "scale": 0.0, "n_points": int(mask.sum())}
    l2 = float(np.sqrt(np.mean(diff ** 2))) / scale
    return {"linf": float(np.max(diff)) / scale, "l2": l2, "scale": scale,
            "n_points": int(mask.sum())}
