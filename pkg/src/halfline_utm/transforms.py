"""Half-line Fourier transforms of the data and time-weighted transforms.

uhat(zeta) = int_0^inf p(y) e^{-i zeta y} dy is evaluated by fixed-order
Gauss-Legendre panels on [0, X_max], with X_max certified from the profile's
decay and panel lengths limited by the oscillation of e^{-i zeta y}.  The
transform exists for Im zeta <= 0; a small positive margin is admissible only
after an explicit exponential-decay certification.

Time-weighted transforms int_0^t e^{Omega(lam,tau)} w(tau) D(lam,tau) dtau
(D = 1/(1 + a(tau) lam^k) inside the integral, or 1 when the family's
denominator is constant and lives outside) are evaluated against a dispersion
model's cumulative-Omega tables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from . import kernels
from .quadrature import composite_nodes

__all__ = [
    "TransformError", "HalfLineProfile", "TransformEngine",
    "half_line_ft", "TimeWeightedTransform", "time_weighted",
    "fhat_time_weighted",
]

_DECAY_FLOOR = 1e-14
_IM_SLACK = 1e-12


class TransformError(ValueError):
    pass


class HalfLineProfile:
    """A data profile on x >= 0: u0(x), or f(x, t) with t in [0, t_max].

    Construction samples the profile, certifies rapid decay, and records the
    truncation radius X_max beyond which |p| <= 1e-14 * max|p| along with an
    estimated exponential decay rate.
    """

    def __init__(self, expression, t_max: float | None = None, x_probe: float = 240.0):
        if isinstance(expression, str):
            expression = ex.parse(expression)
        self.expression = expression
        names = ex.free_vars(expression)
        if not names <= {"x", "t"}:
            raise TransformError(f"profile may only depend on x and t, got {sorted(names)}")
        self.time_dependent = "t" in names
        if self.time_dependent and t_max is None:
            raise TransformError("time-dependent profile needs t_max for certification")
        self.t_max = t_max
        self.admissible_imag = 0.0
        self._certify(x_probe)

    def _envelope(self, ys):
        if self.time_dependent:
            taus = np.linspace(0.0, self.t_max, 9)
            vals = np.abs(self.values_grid(ys, taus))
            return vals.max(axis=1)
        return np.abs(self.values(ys))

    def _certify(self, x_probe):
        ys = np.concatenate([np.linspace(0.0, 8.0, 400), np.geomspace(8.0, x_probe, 400)])
        env = self._envelope(ys)
        peak = float(env.max())
        self.max_abs = peak
        if peak == 0.0:
            self.is_zero = True
            self.x_max = 1.0
            self.decay_rate = np.inf
            return
        self.is_zero = False
        above = np.nonzero(env > _DECAY_FLOOR * peak)[0]
        last = int(above[-1])
        if last == ys.size - 1:
            raise TransformError(
                f"profile does not decay below {_DECAY_FLOOR:g} of its peak by x = "
                f"{x_probe:g}; not usable as rapidly-decreasing data")
        self.x_max = float(ys[last] * 1.1 + 0.5)
        # decay rate from the last decade of the envelope
        tail = slice(max(0, last - 60), last + 1)
        yt, et = ys[tail], env[tail]
        keep = et > 0
        if keep.sum() >= 2:
            slope = np.polyfit(yt[keep], np.log(et[keep]), 1)[0]
            self.decay_rate = float(max(-slope, 0.0))
        else:
            self.decay_rate = 0.0

    def with_margin(self, epsilon: float) -> "HalfLineProfile":
        """Certify evaluation margin Im zeta <= epsilon (> 0 needs real decay)."""
        if epsilon > 0 and epsilon >= 0.75 * self.decay_rate:
            raise TransformError(
                f"requested margin {epsilon:g} not covered by certified decay "
                f"rate {self.decay_rate:g}")
        self.admissible_imag = float(epsilon)
        return self

    def values(self, ys, t: float | None = None):
        b = {"x": np.asarray(ys, dtype=float)}
        if self.time_dependent:
            if t is None:
                raise TransformError("time-dependent profile needs t")
            b["t"] = float(t)
        out = ex.evaluate(self.expression, b)
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(ys)).copy()

    def values_grid(self, ys, taus):
        ys = np.asarray(ys, dtype=float)
        taus = np.asarray(taus, dtype=float)
        b = {"x": ys[:, None]}
        if self.time_dependent:
            b["t"] = taus[None, :]
        out = ex.evaluate(self.expression, b)
        return np.broadcast_to(np.asarray(out, dtype=float), (ys.size, taus.size)).copy()


def _y_rule(x_max, max_abs_re, order=16, density=1.0):
    """Panels on [0, x_max]: length <= pi/|Re zeta| once |Re zeta| is large."""
    h_smooth = x_max / 8.0
    h_osc = np.pi / max(max_abs_re, 1e-9)
    h = min(h_smooth, h_osc) / max(density, 1e-3)
    n = max(8, int(np.ceil(x_max / h)))
    return composite_nodes(np.linspace(0.0, x_max, n + 1), order)


class TransformEngine:
    """Half-line transform of one profile on a fixed y-grid.

    The grid is sized once for the largest |Re zeta| that will be requested;
    transforms at many zeta then reduce to one phase-matrix product.
    """

    def __init__(self, profile: HalfLineProfile, max_abs_re: float,
                 order: int = 16, density: float = 1.0, x_max: float | None = None):
        self.profile = profile
        self.x_max = float(x_max if x_max is not None else profile.x_max)
        self.y, self.wy = _y_rule(self.x_max, max_abs_re, order, density)
        self.max_abs_re = float(max_abs_re)
        if not profile.time_dependent:
            self._coef = (self.wy * profile.values(self.y)).astype(complex)

    def _check_args(self, zetas):
        zetas = np.asarray(zetas, dtype=complex)
        limit = self.profile.admissible_imag + _IM_SLACK
        worst = float(np.max(zetas.imag)) if zetas.size else 0.0
        if worst > limit:
            raise TransformError(
                f"transform argument has Im zeta = {worst:.3g} above the admissible "
                f"bound {limit:.3g}; certify a decay margin first")
        if np.max(np.abs(zetas.real)) > self.max_abs_re * (1.0 + 1e-9) + 1e-9:
            raise TransformError("engine y-grid built for smaller |Re zeta|")
        return zetas

    def transform(self, zetas):
        """uhat(zeta) for a time-independent profile."""
        zetas = self._check_args(zetas)
        if self.profile.is_zero:
            return np.zeros(zetas.shape, dtype=complex)
        flat = zetas.ravel()
        out = kernels.weighted_phase_apply(flat, self.y, self._coef)
        return out.reshape(zetas.shape)

    def transform_table(self, zetas, taus):
        """fhat(zeta_p, tau_q) table for a time-dependent profile."""
        zetas = self._check_args(zetas)
        taus = np.asarray(taus, dtype=float)
        if self.profile.is_zero:
            return np.zeros((zetas.size, taus.size), dtype=complex)
        samples = self.profile.values_grid(self.y, taus) * self.wy[:, None]
        out = np.empty((zetas.size, taus.size), dtype=complex)
        block = max(1, 4_000_000 // max(self.y.size, 1))
        flat = zetas.ravel()
        for start in range(0, flat.size, block):
            E = kernels.phase_matrix(flat[start:start + block], self.y)
            out[start:start + block] = E @ samples
        return out


def half_line_ft(profile: HalfLineProfile, lam, t: float | None = None,
                 x_max: float | None = None):
    """uhat(lam) = int_0^X_max p(y) e^{-i lam y} dy (adequate for Schwartz p).

    Scalar or array ``lam`` with Im lam <= admissible margin.  For a
    time-dependent profile, ``t`` fixes the time slice.
    """
    lam_arr = np.asarray(lam, dtype=complex)
    engine = TransformEngine(profile, float(np.max(np.abs(lam_arr.real))) if lam_arr.size else 1.0,
                             x_max=x_max)
    if profile.time_dependent:
        vals = engine.transform_table(lam_arr.ravel(), [float(t)])[:, 0]
    else:
        vals = engine.transform(lam_arr.ravel())
    return vals.reshape(lam_arr.shape) if lam_arr.shape else complex(vals[0])


@dataclass
class TimeWeightedTransform:
    """int_0^t e^{Omega(lam,tau)} w(tau) D(lam,tau) dtau.

    ``denominator_inside`` selects D = 1/(1 + a(tau) lam^k) (time-dependent
    denominator families) versus D = 1 (constant-denominator families, where
    1/Pi(lam) sits outside the integral).
    """

    model: object  # DispersionModel
    weight: ex.Expression
    denominator_inside: bool = True

    def weight_values(self, taus):
        vals = ex.evaluate(self.weight, {"t": np.asarray(taus, dtype=float)})
        return np.broadcast_to(np.asarray(vals, dtype=float), np.shape(taus)).copy()


def _denominator_factor(model, lams, taus, inside):
    if not inside:
        return np.ones((np.size(lams), np.size(taus)))
    a = ex.evaluate(model.den_coeff, {"t": np.asarray(taus, dtype=float)})
    a = np.broadcast_to(np.asarray(a, dtype=float), np.shape(taus))
    lams = np.asarray(lams, dtype=complex).ravel()
    return 1.0 / (1.0 + a[None, :] * lams[:, None] ** model.k)


def _weighted_integral(model, lams, t, sample_fn, inside, rel_tol):
    """Common core: int_0^t e^Omega * sample(lam_idx, tau) * D dtau, adaptive."""
    lams = np.asarray(lams, dtype=complex).ravel()
    if t == 0:
        return np.zeros(lams.size, dtype=complex)
    prev = None
    n_pan = 4
    for _ in range(10):
        edges = np.linspace(0.0, float(t), n_pan + 1)
        taus, tw, Om, _ = model.cumulative_tables(lams, edges)
        worst = float(np.max(Om.real))
        if worst > 700.0:
            raise TransformError(
                f"exp(Omega) overflow: Re Omega reaches {worst:.3g} (> 700) on the "
                "requested arguments")
        core = np.exp(Om) * sample_fn(lams, taus) * _denominator_factor(model, lams, taus, inside)
        total = core @ tw
        if prev is not None:
            err = np.max(np.abs(total - prev))
            if err <= rel_tol * (np.max(np.abs(total)) + 1e-300) + 1e-15:
                return total
        prev = total
        n_pan *= 2
    raise TransformError("time-weighted transform quadrature did not converge")


def time_weighted(tw: TimeWeightedTransform, lam, t: float, rel_tol: float = 1e-9):
    """Evaluate the transform at (lam, t); lam scalar or array."""
    lam_arr = np.asarray(lam, dtype=complex)
    out = _weighted_integral(
        tw.model, lam_arr, t,
        lambda ls, taus: tw.weight_values(taus)[None, :],
        tw.denominator_inside, rel_tol)
    return out.reshape(lam_arr.shape) if lam_arr.shape else complex(out[0])


def fhat_time_weighted(model, profile: HalfLineProfile, lam, t: float,
                       mapped=None, denominator_inside: bool = True,
                       rel_tol: float = 1e-9):
    """int_0^t e^{Omega(lam,tau)} fhat(arg, tau) D(lam,tau) dtau.

    Omega and D always take the unmapped ``lam``; the transform argument is
    ``mapped`` when given (the symmetry-mapped second argument), else lam.
    """
    lam_arr = np.asarray(lam, dtype=complex)
    args = np.asarray(mapped if mapped is not None else lam, dtype=complex)
    args = np.broadcast_to(args, lam_arr.shape) if lam_arr.shape else args
    engine = TransformEngine(profile, float(np.max(np.abs(np.asarray(args).real)))
                             if np.size(args) else 1.0)

    flat_args = np.asarray(args, dtype=complex).ravel()

    def sample(ls, taus):
        return engine.transform_table(flat_args, taus)

    out = _weighted_integral(model, lam_arr, t, sample, denominator_inside, rel_tol)
    return out.reshape(lam_arr.shape) if lam_arr.shape else complex(out[0])
