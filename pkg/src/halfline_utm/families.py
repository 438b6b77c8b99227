"""Registry of the nine half-line operator families.

Each family is an evolution equation u_t = (spatial terms) + f on x > 0 whose
Fourier-transformed ODE has a rational dispersion coefficient.  The registry
records, per family: which coefficient symbols exist and whether they may
depend on t, the numerator monomials of the dispersion quotient, the
denominator (time-dependent scalar profile 1 + a(t) lam^k, or a fixed
polynomial), the number of boundary data, and display names.

Spatial degree k and dispersion shapes (lam = transform variable):

  1  u_t = a(t) u_xxt + b(t) u_xx - c(t) u + f        w = (b l^2 + c)/(1 + a l^2)
  2  u_t = a u_xxt - b(t) u_x + f                     w = i b l /(1 + a l^2)
  3  u_t = -a(t) u_xxxxt - b(t) u_xxxx - c(t) u + f   w = (b l^4 + c)/(1 + a l^4)
  4  u_t = -a u_xxxxt + b(t) u_xx + f                 w = b l^2 /(1 + a l^4)
  5  u_t = -a u_xxxxt + b u_xxt - c(t) u_xxxx + f     w = c l^4 /(1 + b l^2 + a l^4)
  6  u_t = -a u_xxxxt + b u_xxt - c(t) u_x + f        w = i c l /(1 + b l^2 + a l^4)
  7  u_t = a u_6xt - b u_4xt + c u_xxt + d(t) u_xx+f  w = d l^2 /(1 + c l^2 + b l^4 + a l^6)
  8  u_t = a(t) u_6xt + b(t) u_6x - c(t) u + f        w = (b l^6 + c)/(1 + a l^6)
  9  u_t = -(-1)^nu [a(t) u_{2nu,x,t} + b(t) u_{2nu,x}] - c(t) u + f
                                                      w = (b l^2nu + c)/(1 + a l^2nu)
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["FamilyInfo", "FAMILIES", "resolve_family", "OperatorFamily"]


@dataclass(frozen=True)
class FamilyInfo:
    id: int
    name: str
    aliases: tuple
    pde_text: str
    # coefficient slot -> "time" (may depend on t) or "const" (must not)
    coeff_slots: dict
    # numerator monomials of omega: (power, coeff_name, complex prefactor);
    # powers given for general nu use the marker -1 -> 2*nu
    omega_numerator: tuple
    # denominator: ("profile", coeff_name, power) meaning 1 + coeff(t)*lam^power,
    # or ("poly", ((power, coeff_name-or-1), ...)) for a fixed polynomial
    denominator: tuple
    n_boundary: int  # boundary data required (g_0 .. g_{n-1}); -1 -> nu
    spatial_order: int  # -1 -> 2*nu


_P = "profile"
_Q = "poly"

FAMILIES = {
    1: FamilyInfo(
        1, "pseudo-parabolic", ("sobolev", "barenblatt"),
        "u_t = alpha(t) u_xxt + beta(t) u_xx - gamma(t) u + f",
        {"alpha": "time", "beta": "time", "gamma": "time"},
        ((2, "beta", 1.0), (0, "gamma", 1.0)),
        (_P, "alpha", 2), 1, 2),
    2: FamilyInfo(
        2, "bbm-type", ("benjamin-bona-mahony", "regularized-long-wave"),
        "u_t = alpha u_xxt - beta(t) u_x + f",
        {"alpha": "const", "beta": "time"},
        ((1, "beta", 1.0j),),
        (_Q, ((0, 1), (2, "alpha"))), 1, 2),
    3: FamilyInfo(
        3, "fourth-order-sobolev", (),
        "u_t = -alpha(t) u_xxxxt - beta(t) u_xxxx - gamma(t) u + f",
        {"alpha": "time", "beta": "time", "gamma": "time"},
        ((4, "beta", 1.0), (0, "gamma", 1.0)),
        (_P, "alpha", 4), 2, 4),
    4: FamilyInfo(
        4, "fourth-order-diffusive", (),
        "u_t = -alpha u_xxxxt + beta(t) u_xx + f",
        {"alpha": "const", "beta": "time"},
        ((2, "beta", 1.0),),
        (_Q, ((0, 1), (4, "alpha"))), 2, 4),
    5: FamilyInfo(
        5, "mixed-mass-diffusive", (),
        "u_t = -alpha u_xxxxt + beta u_xxt - gamma(t) u_xxxx + f",
        {"alpha": "const", "beta": "const", "gamma": "time"},
        ((4, "gamma", 1.0),),
        (_Q, ((0, 1), (2, "beta"), (4, "alpha"))), 2, 4),
    6: FamilyInfo(
        6, "mixed-mass-convective", (),
        "u_t = -alpha u_xxxxt + beta u_xxt - gamma(t) u_x + f",
        {"alpha": "const", "beta": "const", "gamma": "time"},
        ((1, "gamma", 1.0j),),
        (_Q, ((0, 1), (2, "beta"), (4, "alpha"))), 2, 4),
    7: FamilyInfo(
        7, "sixth-order-mixed-mass", (),
        "u_t = alpha u_6xt - beta u_4xt + gamma u_xxt + delta(t) u_xx + f",
        {"alpha": "const", "beta": "const", "gamma": "const", "delta": "time"},
        ((2, "delta", 1.0),),
        (_Q, ((0, 1), (2, "gamma"), (4, "beta"), (6, "alpha"))), 3, 6),
    8: FamilyInfo(
        8, "sixth-order-sobolev", (),
        "u_t = alpha(t) u_6xt + beta(t) u_6x - gamma(t) u + f",
        {"alpha": "time", "beta": "time", "gamma": "time"},
        ((6, "beta", 1.0), (0, "gamma", 1.0)),
        (_P, "alpha", 6), 3, 6),
    9: FamilyInfo(
        9, "canonical-2nu", ("general-even-order",),
        "u_t = -(-1)^nu [alpha(t) d^2nu/dx^2nu u_t + beta(t) d^2nu/dx^2nu u] - gamma(t) u + f",
        {"alpha": "time", "beta": "time", "gamma": "time"},
        ((-1, "beta", 1.0), (0, "gamma", 1.0)),
        (_P, "alpha", -1), -1, -1),
}

_ALIAS = {}
for _info in FAMILIES.values():
    _ALIAS[str(_info.id)] = _info.id
    _ALIAS[_info.name] = _info.id
    for _a in _info.aliases:
        _ALIAS[_a] = _info.id


def resolve_family(ident) -> FamilyInfo:
    """Look up a family by integer id or by name/alias string."""
    if isinstance(ident, int):
        key = str(ident)
    else:
        key = str(ident).strip().lower()
    if key not in _ALIAS:
        raise KeyError(f"unknown operator family {ident!r}; "
                       f"known: 1-9 or {sorted(set(_ALIAS) - set('123456789'))}")
    return FAMILIES[_ALIAS[key]]


@dataclass(frozen=True)
class OperatorFamily:
    """A family selection: id 1-9, plus the even order parameter for id 9."""

    id: int
    nu: int | None = None

    def __post_init__(self):
        if self.id not in FAMILIES:
            raise ValueError(f"family id must be 1..9, got {self.id}")
        if self.id == 9:
            if self.nu is None or self.nu < 1:
                raise ValueError("family 9 requires an integer nu >= 1")
        elif self.nu is not None:
            raise ValueError(f"nu is only meaningful for family 9")

    @property
    def info(self) -> FamilyInfo:
        return FAMILIES[self.id]

    @property
    def spatial_order(self) -> int:
        k = self.info.spatial_order
        return 2 * self.nu if k == -1 else k

    @property
    def n_boundary(self) -> int:
        n = self.info.n_boundary
        return self.nu if n == -1 else n

    def describe(self) -> str:
        base = f"family {self.id} ({self.info.name})"
        return f"{base}, nu={self.nu}" if self.id == 9 else base
