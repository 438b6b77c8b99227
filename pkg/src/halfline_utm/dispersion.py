"""Rational dispersion relations: omega, its time integral, poles, symmetries.

For each operator family the transformed equation reads

    d/dt uhat + omega(lam, t) uhat = (boundary terms + forcing)/denominator,

with omega a rational function of lam whose denominator is either a fixed
polynomial Pi(lam) or the time-dependent profile 1 + a(t) lam^k.  This module
evaluates omega and Omega(lam, t) = int_0^t omega, locates denominator zeros
(with inf/sup modulus bounds over the working time range), and constructs the
t-independent maps sigma with Omega(sigma(lam), t) = Omega(lam, t) that drive
the boundary-transform elimination.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import expr as ex
from .families import OperatorFamily, resolve_family

__all__ = [
    "AssumptionError", "PoleProximityError", "BranchTrackingError",
    "DispersionModel", "PoleSet", "LinearMap", "InversionMap", "TrackedRootMap",
    "build_model", "validate_resultant",
]

_T_SAMPLES = 1024
_MARGIN = 0.01  # safety shrink/grow applied to sampled root-modulus bounds


class AssumptionError(ValueError):
    """A family assumption failed (named, with the offending sample)."""


class PoleProximityError(ValueError):
    pass


class BranchTrackingError(RuntimeError):
    pass


def _as_expr(value):
    if isinstance(value, ex.Expression):
        return value
    return ex.Num(float(value))


def _sample(e, ts):
    vals = ex.evaluate(e, {"t": np.asarray(ts, dtype=float)})
    return np.broadcast_to(np.asarray(vals, dtype=float), np.shape(ts)).copy()


# ---------------------------------------------------------------------------
# cumulative Gauss-Legendre integration (spectral integration matrix)

@lru_cache(maxsize=8)
def _cumulative_matrix(order):
    """S with (S f)(x_i) = int_{-1}^{x_i} interpolant of f, plus full weights."""
    x, w = np.polynomial.legendre.leggauss(order)
    V = np.polynomial.legendre.legvander(x, order - 1)
    W = np.zeros((order, order))
    for k in range(order):
        if k == 0:
            W[:, 0] = x + 1.0
        else:
            pk1 = np.polynomial.legendre.legval(x, [0.0] * (k + 1) + [1.0])
            pkm = np.polynomial.legendre.legval(x, [0.0] * (k - 1) + [1.0])
            lo = (-1.0) ** (k + 1) - (-1.0) ** (k - 1)  # = 0; kept for clarity
            W[:, k] = (pk1 - pkm - lo) / (2.0 * k + 1.0)
    S = W @ np.linalg.inv(V)
    return x, w, S


@dataclass(frozen=True)
class PoleSet:
    """Denominator zeros at a fixed time, plus modulus bounds over [0, T]."""

    zeros: np.ndarray
    degree: int
    t: float
    c0: float
    C0: float
    locus_t: np.ndarray | None = None
    locus_radius: np.ndarray | None = None

    @property
    def upper(self):
        return self.zeros[self.zeros.imag > 0]

    @property
    def lower(self):
        return self.zeros[self.zeros.imag < 0]


class LinearMap:
    """sigma(lam) = mu * lam with |mu| = 1."""

    kind = "linear"

    def __init__(self, mu, contour_tag=None):
        mu = complex(mu)
        # snap roundoff from exp(i pi m / nu) so exact rotations stay exact
        re = round(mu.real) if abs(mu.real - round(mu.real)) < 1e-14 else mu.real
        im = round(mu.imag) if abs(mu.imag - round(mu.imag)) < 1e-14 else mu.imag
        self.mu = complex(re, im)
        self.contour_tag = contour_tag

    def __call__(self, lam):
        return self.mu * np.asarray(lam, dtype=complex)

    apply_path = __call__

    def describe(self):
        return f"sigma(lam) = ({self.mu:.6g}) * lam"


class InversionMap:
    """sigma(lam) = 1 / (c * lam)."""

    kind = "inversion"

    def __init__(self, c, contour_tag=None):
        self.c = float(c)
        self.contour_tag = contour_tag

    def __call__(self, lam):
        return 1.0 / (self.c * np.asarray(lam, dtype=complex))

    apply_path = __call__

    def describe(self):
        return f"sigma(lam) = 1/({self.c:.6g} * lam)"


class TrackedRootMap:
    """A branch of an algebraic map Q(lam, sigma) = 0, realized numerically.

    All roots of Q(lam, .) are found by companion-matrix solve at each point;
    the branch is selected by nearest-neighbor continuation from a seed pair
    (lam_center, sigma_seed), walking along the supplied path.  With
    sqrt_mode=True the polynomial is in zeta = sigma^2 and both square roots
    of every zeta-root are candidates.
    """

    kind = "tracked"

    def __init__(self, coeff_fn, lam_center, sigma_seed, sqrt_mode=False,
                 contour_tag=None, label="sigma"):
        self.coeff_fn = coeff_fn  # lam -> 1-D complex coefficients, highest first
        self.lam_center = complex(lam_center)
        self.sigma_seed = complex(sigma_seed)
        self.sqrt_mode = sqrt_mode
        self.contour_tag = contour_tag
        self.label = label

    def _candidates(self, lam):
        coeffs = np.asarray(self.coeff_fn(lam), dtype=complex)
        roots = np.roots(coeffs)
        if self.sqrt_mode:
            s = np.sqrt(roots.astype(complex))
            roots = np.concatenate([s, -s])
        return roots

    def _step(self, lam, prev):
        cand = self._candidates(lam)
        d = np.abs(cand - prev)
        order = np.argsort(d)
        best, runner = d[order[0]], d[order[1]] if d.size > 1 else np.inf
        scale = 1.0 + abs(prev)
        if runner - best <= 1e-8 * scale and runner != best:
            raise BranchTrackingError(
                f"ambiguous branch continuation for {self.label} at lam={lam:.8g}: "
                f"two roots within {runner - best:.3g} of the seed distance")
        return complex(cand[order[0]])

    def apply_path(self, lams):
        """Evaluate along a continuous path that starts near the seed center."""
        lams = np.asarray(lams, dtype=complex).ravel()
        out = np.empty(lams.shape, dtype=complex)
        prev = self.sigma_seed
        if lams.size:
            # bridge from the seed center to the first path point
            for lam in np.linspace(self.lam_center, lams[0], 9)[1:]:
                prev = self._step(lam, prev)
        for i, lam in enumerate(lams):
            prev = self._step(lam, prev)
            out[i] = prev
        return out

    def __call__(self, lam):
        lam_arr = np.asarray(lam, dtype=complex)
        flat = lam_arr.ravel()
        out = np.empty(flat.shape, dtype=complex)
        for i, single in enumerate(flat):
            prev = self.sigma_seed
            for step in np.linspace(self.lam_center, single, 9)[1:]:
                prev = self._step(step, prev)
            out[i] = prev
        return out.reshape(lam_arr.shape) if lam_arr.shape else complex(out[0])

    def describe(self):
        return (f"{self.label}: tracked root, seed sigma({self.lam_center:.6g}) "
                f"= {self.sigma_seed:.6g}")


class DispersionModel:
    """Evaluators for one family's omega/Omega plus pole and symmetry data."""

    def __init__(self, family: OperatorFamily, coeffs: dict, t_max: float = 1.0):
        self.family = family
        self.info = family.info
        self.t_max = float(t_max)
        self.coeffs = {k: _as_expr(v) for k, v in coeffs.items()}
        self.k = family.spatial_order
        self.nu = self.k // 2

        num = []
        for power, cname, pref in self.info.omega_numerator:
            p = 2 * self.nu if power == -1 else power
            num.append((p, self.coeffs[cname], complex(pref)))
        self.num_terms = num

        den = self.info.denominator
        if den[0] == "profile":
            self.profile_denominator = True
            self.den_coeff = self.coeffs[den[1]]
        else:
            self.profile_denominator = False
            terms = []
            for power, cname in den[1]:
                terms.append((power, 1.0 if cname == 1 else float(self._const(cname))))
            self.pi_terms = tuple(terms)

        self._const_coeffs = {
            name: "t" not in ex.free_vars(e) for name, e in self.coeffs.items()
        }
        self._omega_cache = {}
        self._anti_cache = {}
        self._validate()

    # -- construction checks -------------------------------------------------

    def _const(self, name):
        e = self.coeffs[name]
        if "t" in ex.free_vars(e):
            raise AssumptionError(
                f"family {self.family.id} requires constant {name}, got {ex.unparse(e)!r}")
        return float(ex.evaluate(e, {}))

    def _validate(self):
        ts = np.linspace(0.0, self.t_max, _T_SAMPLES)
        for name, mode in self.info.coeff_slots.items():
            if name not in self.coeffs:
                raise AssumptionError(f"family {self.family.id} needs coefficient {name!r}")
            if mode == "const":
                self._const(name)
        alpha = _sample(self.coeffs["alpha"], ts)
        if not np.all(np.isfinite(alpha)):
            raise AssumptionError("alpha(t) must be finite on [0, t_max]")
        if np.min(alpha) <= 0:
            bad = ts[int(np.argmin(alpha))]
            raise AssumptionError(
                f"alpha(t) must be strictly positive; alpha({bad:.6g}) = {np.min(alpha):.6g}")
        if self.family.id == 1:
            beta = _sample(self.coeffs["beta"], ts)
            if np.min(np.abs(beta)) == 0:
                bad = ts[int(np.argmin(np.abs(beta)))]
                raise AssumptionError(f"family 1 requires beta(t) != 0; beta({bad:.6g}) = 0")
        if self.family.id in (5, 6):
            a, b = self._const("alpha"), self._const("beta")
            disc = 4.0 * a - b * b
            if abs(disc) <= 1e-12 * max(1.0, 4 * a, b * b):
                raise AssumptionError(
                    f"family {self.family.id} with 4*alpha = beta^2 is rejected: the "
                    "denominator polynomial has two double zeros, so the two-map "
                    "elimination degenerates (supply u_xx data instead)")
            if disc < 0 and b <= 0:
                raise AssumptionError(
                    f"family {self.family.id} with 4*alpha < beta^2 and beta <= 0 has "
                    "real denominator zeros; outside the solvable cases")
        if self.family.id == 7:
            a, b, g = self._const("alpha"), self._const("beta"), self._const("gamma")
            value, ok = validate_resultant(a, b, g)
            if not ok:
                raise AssumptionError(
                    f"family 7 coefficient resultant vanishes ({value:.3g}): the degree-6 "
                    "denominator would have repeated zeros")
            zeros = self._poly_zeros()
            if np.min(np.abs(zeros.imag)) <= 1e-9 * np.max(np.abs(zeros)):
                raise AssumptionError(
                    "family 7 denominator has zeros on the real axis; the three-up/"
                    "three-down split fails for these coefficients")

    # -- denominator / omega -------------------------------------------------

    def _den_value(self, lam, t):
        lam = np.asarray(lam, dtype=complex)
        if self.profile_denominator:
            a = float(ex.evaluate(self.den_coeff, {"t": float(t)}))
            return 1.0 + a * lam ** self.k
        out = np.zeros(lam.shape, dtype=complex) if lam.shape else 0.0 + 0.0j
        for p, c in self.pi_terms:
            out = out + c * lam ** p
        return out

    def pi(self, lam):
        """The fixed denominator polynomial (families with constant profile)."""
        if self.profile_denominator:
            raise ValueError("denominator is time-dependent for this family")
        return self._den_value(lam, 0.0)

    def omega(self, lam, t, guard=True):
        """Dispersion value at (lam, t); errors within 1e-12 of a pole."""
        lam = np.asarray(lam, dtype=complex)
        den = self._den_value(lam, t)
        if guard:
            tol = 1e-12 * (1.0 + np.abs(lam) ** self.k)
            if np.any(np.abs(den) <= tol):
                raise PoleProximityError(
                    f"lam within 1e-12 of a dispersion pole at t={t} (family {self.family.id})")
        num = np.zeros(lam.shape, dtype=complex) if lam.shape else 0.0 + 0.0j
        for p, e, pref in self.num_terms:
            c = pref * float(ex.evaluate(e, {"t": float(t)}))
            num = num + c * lam ** p
        return num / den

    def omega_grid(self, lams, taus):
        """omega on the outer product lams x taus; (n_lam, n_tau) array."""
        lams = np.asarray(lams, dtype=complex).ravel()
        taus = np.asarray(taus, dtype=float).ravel()
        num = np.zeros((lams.size, taus.size), dtype=complex)
        for p, e, pref in self.num_terms:
            c = pref * _sample(e, taus)
            num += lams[:, None] ** p * c[None, :]
        if self.profile_denominator:
            a = _sample(self.den_coeff, taus)
            den = 1.0 + a[None, :] * lams[:, None] ** self.k
        else:
            den = np.zeros((lams.size, 1), dtype=complex)
            for p, c in self.pi_terms:
                den += c * lams[:, None] ** p
        return num / den

    # -- Omega ---------------------------------------------------------------

    def factored(self) -> bool:
        """True when Omega(lam, t) = sum_p rho_p(lam) * int_0^t coeff_p."""
        if not self.profile_denominator:
            return True
        return self._const_coeffs[self.info.denominator[1]]

    def _antiderivative(self, e, t):
        """int_0^t e(tau) dtau for a scalar coefficient expression, cached."""
        key = (id(e), float(t))
        hit = self._anti_cache.get(key)
        if hit is not None:
            return hit
        val = _adaptive_integral(lambda ts: _sample(e, ts), 0.0, float(t))
        self._anti_cache[key] = val
        return val

    def big_omega(self, lam, t, rel_tol=1e-10):
        """Omega(lam, t) = int_0^t omega(lam, tau) dtau.

        Uses the factored fast path (lam-dependent prefactor times a cached
        coefficient antiderivative) whenever the denominator is constant in t;
        otherwise adaptive panel quadrature in tau to rel_tol.
        """
        lam = np.asarray(lam, dtype=complex)
        if t == 0:
            return np.zeros(lam.shape, dtype=complex) if lam.shape else 0.0 + 0.0j
        if self.factored():
            den = self._den_value(lam, 0.0)
            out = np.zeros(lam.shape, dtype=complex) if lam.shape else 0.0 + 0.0j
            for p, e, pref in self.num_terms:
                out = out + (pref * self._antiderivative(e, t)) * lam ** p / den
            return out
        grid = lam.ravel()
        vals = _adaptive_integral(lambda ts: self.omega_grid(grid, ts), 0.0, float(t),
                                  rel_tol=rel_tol, vector=True)
        return vals.reshape(lam.shape) if lam.shape else complex(vals[0])

    def big_omega_limit(self, t):
        """lim_{lam->inf} Omega(lam, t) (0 when the numerator degree is lower)."""
        top = [term for term in self.num_terms if term[0] == self.k]
        if not top:
            return 0.0 + 0.0j
        p, e, pref = top[0]
        if self.profile_denominator:
            ratio = ex.simplify(ex.Div(e, self.den_coeff))
            return pref * _adaptive_integral(lambda ts: _sample(ratio, ts), 0.0, float(t))
        lead = dict(self.pi_terms)[self.k]
        return pref * self._antiderivative(e, t) / lead

    def cumulative_tables(self, lams, edges, order=16):
        """Composite-GL tau rule over ``edges`` plus Omega at all nodes.

        Returns (tau_nodes, tau_weights, Om_nodes, Om_edges) with
        Om_nodes[i, q] = Omega(lams[i], tau_q) and Om_edges[i, j] =
        Omega(lams[i], edges[j]).  Omega is accumulated panel by panel with a
        spectral cumulative-integration matrix, so no interpolation error
        beyond the GL interpolant of omega itself enters.
        """
        lams = np.asarray(lams, dtype=complex).ravel()
        edges = np.asarray(edges, dtype=float)
        x, w, S = _cumulative_matrix(order)
        n_pan = edges.size - 1
        tau_nodes = np.empty(n_pan * order)
        tau_w = np.empty(n_pan * order)
        Om_nodes = np.empty((lams.size, n_pan * order), dtype=complex)
        Om_edges = np.empty((lams.size, n_pan + 1), dtype=complex)
        Om_edges[:, 0] = 0.0
        for j in range(n_pan):
            a, b = edges[j], edges[j + 1]
            half = 0.5 * (b - a)
            taus = 0.5 * (a + b) + half * x
            sl = slice(j * order, (j + 1) * order)
            tau_nodes[sl] = taus
            tau_w[sl] = half * w
            om = self.omega_grid(lams, taus)
            Om_nodes[:, sl] = Om_edges[:, j][:, None] + half * (om @ S.T)
            Om_edges[:, j + 1] = Om_edges[:, j] + half * (om @ w)
        return tau_nodes, tau_w, Om_nodes, Om_edges

    # -- poles ----------------------------------------------------------------

    def _poly_zeros(self):
        top = max(p for p, _ in self.pi_terms)
        coeffs = np.zeros(top + 1, dtype=complex)
        for p, c in self.pi_terms:
            coeffs[top - p] = c
        roots = np.roots(coeffs)
        dpoly = np.polyder(coeffs)
        for _ in range(6):  # Newton polish
            roots = roots - np.polyval(coeffs, roots) / np.polyval(dpoly, roots)
        return roots

    def _profile_radius(self, ts):
        a = _sample(self.den_coeff, np.asarray(ts, dtype=float))
        return a ** (-1.0 / self.k)

    def pole_bounds(self):
        """(c0, C0): inf/sup of the root modulus over [0, t_max], with a 1%
        safety shrink/grow, plus the sampled locus for time-dependent cases."""
        if self.profile_denominator:
            ts = np.linspace(0.0, self.t_max, _T_SAMPLES)
            r = self._profile_radius(ts)
            return (1.0 - _MARGIN) * float(np.min(r)), (1.0 + _MARGIN) * float(np.max(r)), ts, r
        radii = np.abs(self._poly_zeros())
        return float(np.min(radii)), float(np.max(radii)), None, None

    def poles(self, t: float) -> PoleSet:
        """All denominator zeros at time t, Newton-polished."""
        c0, C0, ts, locus = self.pole_bounds()
        if self.profile_denominator:
            a = float(ex.evaluate(self.den_coeff, {"t": float(t)}))
            radius = a ** (-1.0 / self.k)
            angles = np.pi * (2 * np.arange(self.k) + 1) / self.k
            zeros = radius * np.exp(1j * angles)
            # Newton polish on 1 + a lam^k
            for _ in range(4):
                zeros = zeros - (1.0 + a * zeros ** self.k) / (self.k * a * zeros ** (self.k - 1))
        else:
            zeros = self._poly_zeros()
            d = np.abs(zeros[:, None] - zeros[None, :]) + np.eye(zeros.size)
            if np.min(d) <= 1e-8 * max(1.0, np.max(np.abs(zeros))):
                raise AssumptionError(
                    f"family {self.family.id}: repeated denominator zeros detected")
        resid = np.abs(self._den_value(zeros, t))
        tol = 1e-10 * (1.0 + np.abs(zeros) ** self.k)
        if np.any(resid > tol):
            raise RuntimeError("pole polish failed to reach residual tolerance")
        order = np.lexsort((zeros.imag, np.round(zeros.real, 12)))
        return PoleSet(zeros[order], self.k, float(t), c0, C0, ts, locus)

    def upper_poles(self, t: float = 0.0):
        """Upper-half-plane zeros ordered by ascending angle (deterministic)."""
        ps = self.poles(t)
        up = ps.upper
        return up[np.argsort(np.angle(up))]

    # -- symmetry maps ---------------------------------------------------------

    def ray_angles(self):
        """Contour ray angles for the time-dependent-denominator families."""
        nu = self.nu
        return [np.pi * (2 * j - 1) / (2.0 * nu) for j in range(1, nu + 1)]

    def rotation_orders(self, theta):
        """Rotation indices m (sigma = e^{i m pi/nu} lam) sending the ray at
        ``theta`` strictly into the lower half-plane; exactly nu of them."""
        nu = self.nu
        out = [m for m in range(1, 2 * nu) if math.sin(theta + m * math.pi / nu) < 0]
        assert len(out) == nu
        return out

    def symmetry_maps(self):
        """Per-contour symmetry maps: list of lists, index = contour index.

        Returns (maps_per_contour, discarded) where discarded holds
        (description, reason) pairs for branches the construction rejects.
        """
        fid = self.family.id
        if fid in (1, 3, 8, 9):
            per = []
            for j, theta in enumerate(self.ray_angles()):
                tag = f"ray{j}"
                per.append([LinearMap(cmath.exp(1j * m * math.pi / self.nu), tag)
                            for m in self.rotation_orders(theta)])
            return per, []
        if fid == 2:
            alpha = self._const("alpha")
            return [[InversionMap(alpha, "loop0")]], []
        if fid == 4:
            alpha = self._const("alpha")
            discarded = [("sigma(lam) = -1/(lam*sqrt(alpha))",
                          "image lies in the upper half-plane at both loop centers")]
            per = [[LinearMap(-1.0, f"loop{j}"), InversionMap(math.sqrt(alpha), f"loop{j}")]
                   for j in range(2)]
            return per, discarded
        if fid == 5:
            beta = self._const("beta")
            alpha = self._const("alpha")
            centers = self.upper_poles()
            per = []
            for j, lam_j in enumerate(centers):
                seed = 1.0 / (lam_j * math.sqrt(alpha))
                tracked = TrackedRootMap(
                    lambda lam, b=beta: np.array([1.0 + b * lam * lam, 0.0, lam * lam]),
                    lam_j, seed, contour_tag=f"loop{j}", label=f"sigma_{j + 1}")
                per.append([LinearMap(-1.0, f"loop{j}"), tracked])
            discarded = [("-sqrt(-lam^2/(1+beta*lam^2)) branch",
                          "image lies in the upper half-plane at the loop centers")]
            return per, discarded
        if fid == 6:
            alpha = self._const("alpha")
            beta = self._const("beta")
            centers = self.upper_poles()

            def cubic(lam, a=alpha, b=beta):
                return np.array([a * lam, a * lam * lam, b * lam + a * lam ** 3, -1.0])

            per = []
            for j, lam_j in enumerate(centers):
                row = [TrackedRootMap(cubic, lam_j, -centers[k], contour_tag=f"loop{j}",
                                      label=f"sigma_{j + 1},{k + 1}")
                       for k in range(len(centers))]
                per.append(row)
            discarded = [("third cubic root (upper half-plane image)",
                          "not needed: two unknowns per contour")]
            return per, discarded
        if fid == 7:
            alpha = self._const("alpha")
            beta = self._const("beta")
            centers = self.upper_poles()

            def zeta_cubic(lam, a=alpha, b=beta):
                l2 = lam * lam
                return np.array([a * l2, b * l2,
                                 -(1.0 + b * l2 * l2 + a * l2 * l2 * l2), l2])

            per = []
            for j, lam_j in enumerate(centers):
                row = [TrackedRootMap(zeta_cubic, lam_j, -centers[k], sqrt_mode=True,
                                      contour_tag=f"loop{j}", label=f"sigma_{j + 1},{k + 1}")
                       for k in range(len(centers))]
                per.append(row)
            return per, [("+sqrt branches with upper-half-plane images",
                          "rejected by seed selection at the loop centers")]
        raise AssertionError(f"unhandled family {fid}")


def validate_resultant(alpha: float, beta: float, gamma: float):
    """Resultant gate for the sixth-order mixed-mass family.

    Builds the 5x5 Sylvester-style matrix of the cubic 1 + gamma mu + beta mu^2
    + alpha mu^3 and its derivative, returns (determinant, passed); fails when
    the determinant is within 1e-12 * scale of zero (repeated zeros).
    """
    a, b, g = float(alpha), float(beta), float(gamma)
    M = np.array([
        [a, 0, 3 * a, 0, 0],
        [b, a, 2 * b, 3 * a, 0],
        [g, b, g, 2 * b, 3 * a],
        [1, g, 0, g, 2 * b],
        [0, 1, 0, 0, g],
    ], dtype=float)
    det = float(np.linalg.det(M))
    scale = max(1.0, abs(a), abs(b), abs(g)) ** 5
    return det, abs(det) > 1e-12 * scale


def build_model(family, coeffs, nu=None, t_max: float = 1.0) -> DispersionModel:
    """Build a dispersion model for a family id/name and coefficient set.

    ``coeffs`` values may be Expressions, floats, or expression strings.
    Assumption violations (positivity, constancy, degeneracy) raise
    AssumptionError naming the failed condition.
    """
    info = resolve_family(family if not isinstance(family, OperatorFamily) else family.id)
    fam = family if isinstance(family, OperatorFamily) else OperatorFamily(
        info.id, nu if info.id == 9 else None)
    parsed = {}
    for name, value in coeffs.items():
        if isinstance(value, str):
            parsed[name] = ex.parse(value)
        else:
            parsed[name] = _as_expr(value)
    return DispersionModel(fam, parsed, t_max=t_max)


def _adaptive_integral(f, a, b, rel_tol=1e-12, vector=False, max_level=14):
    """int_a^b f, by panel-doubling composite Gauss-Legendre to rel_tol.

    ``f`` maps a tau array to values (n_tau,) or (n_vec, n_tau) for vector=True.
    """
    if b == a:
        return 0.0
    if b < a:
        raise ValueError("integration range must be forward")
    x16, w16 = np.polynomial.legendre.leggauss(16)
    prev = None
    n_pan = 1
    for _ in range(max_level):
        edges = np.linspace(a, b, n_pan + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        halves = 0.5 * np.diff(edges)
        taus = (mids[:, None] + halves[:, None] * x16[None, :]).ravel()
        weights = (halves[:, None] * w16[None, :]).ravel()
        vals = np.asarray(f(taus))
        total = vals @ weights
        if prev is not None:
            err = np.max(np.abs(total - prev))
            scale = np.max(np.abs(total)) + 1e-300
            if err <= rel_tol * scale + 1e-15:
                return total
        prev = total
        n_pan *= 2
    raise RuntimeError("time quadrature failed to converge to tolerance")
