"""Catalog of Hamiltonians ``H(x, p)`` and dissipation fluxes ``F(p)``.

Every catalog member is an immutable value object that evaluates itself
with numpy, exposes its convex-difference split ``H = H1 - H2`` together
with the convexity fraction ``alpha`` (``H >= alpha * H1``) and growth data
``(C1, C2, q)`` with ``H1(p) >= C1 * (|p|**q - C2)``, and carries an integer
code used by the compiled grid kernels in :mod:`pathwise_hj._kernels`.

Convention for conjugates: ``L(v) = sup_p (p * v - H(p))``.  For
``H(p) = |p|**q`` with ``q > 1`` the supremum is attained at
``p = (|v| / q)**(1 / (q - 1))`` and equals
``C_q * |v|**(q / (q - 1))`` with ``C_q = (q - 1) * q**(-q / (q - 1))``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special

__all__ = [
    "CoefficientField",
    "HamiltonianSpec",
    "DissipationSpec",
    "hamiltonian",
    "dissipation",
    "HAMILTONIAN_KEYS",
    "DISSIPATION_KEYS",
    "evaluate",
    "gauge_shift",
    "legendre_transform",
    "legendre_numeric",
    "power_conjugate_constant",
    "g_transform",
    "entropy_companion",
    "dc_check",
    "growth_check",
    "P_MAX_DEFAULT",
]

P_MAX_DEFAULT = 64.0

FAMILY_CODES = {
    "zero": 0,
    "power": 1,
    "graph_mcf": 2,
    "ohta_kawasaki": 3,
    "quadratic": 4,
    "eikonal_potential": 5,
    "isotropic_front": 6,
    "abs_component": 7,
}

FLUX_CODES = {
    "zero": 0,
    "linear": 1,
    "arctan": 2,
    "power": 3,
    "porous_medium": 3,
    "bump": 4,
}


# ---------------------------------------------------------------------------
# coefficient fields on the torus


@dataclass(frozen=True)
class CoefficientField:
    """Periodic coefficient ``x -> c(x)`` on the unit torus.

    Presets
    -------
    ``sin2``
        ``offset + amp * sin(2 pi x)**2`` (two minima per period).
    ``cos_unique``
        ``offset + amp * (1 - cos(2 pi x)) / 2`` (unique minimum at 0).
    ``cos_front``
        ``offset + amp * cos(2 pi x)`` (unique maximum at 0).
    ``constant``
        ``offset``.
    ``sampled``
        Periodic linear interpolation of ``samples`` on a uniform grid.
    """

    key: str
    amp: float = 1.0
    offset: float = 0.0
    samples: tuple[float, ...] | None = None

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.key == "sin2":
            return self.offset + self.amp * np.sin(2 * np.pi * x) ** 2
        if self.key == "cos_unique":
            return self.offset + self.amp * 0.5 * (1.0 - np.cos(2 * np.pi * x))
        if self.key == "cos_front":
            return self.offset + self.amp * np.cos(2 * np.pi * x)
        if self.key == "constant":
            return self.offset + 0.0 * x
        if self.key == "sampled":
            s = np.asarray(self.samples, dtype=float)
            grid = np.arange(s.size + 1) / s.size
            return np.interp(np.mod(x, 1.0), grid, np.append(s, s[0]))
        raise ValueError(f"unknown coefficient preset {self.key!r}")

    def on_grid(self, n: int) -> np.ndarray:
        return np.asarray(self(np.arange(n) / n), dtype=float)

    @classmethod
    def from_csv(cls, path) -> "CoefficientField":
        vals = np.loadtxt(path, comments="#", ndmin=1)
        return cls("sampled", samples=tuple(float(v) for v in vals))


# ---------------------------------------------------------------------------
# Hamiltonians


def _ok_h(p):
    return (1.0 + p * p) ** 0.25 - 1.0


def _ok_i0(p):
    # int_0^p (1 + s^2)^(-3/4) ds
    return p * special.hyp2f1(0.5, 0.75, 1.5, -p * p)


def _ok_h1(p):
    p = np.asarray(p, dtype=float)
    return 0.5 * p * _ok_i0(p) - _ok_h(p)


@dataclass(frozen=True)
class HamiltonianSpec:
    """A catalog Hamiltonian.

    Attributes
    ----------
    family : str
        One of :data:`HAMILTONIAN_KEYS`.
    q : float
        Exponent of the ``power`` family.
    coeff : CoefficientField or None
        ``V`` for ``eikonal_potential``, ``a`` for ``isotropic_front``.
    offset : float
        Constant added to the catalog form (raw, unshifted Hamiltonians
        carry ``offset = H(0)``; see :func:`gauge_shift`).
    axis : int
        Active gradient component for ``abs_component``.
    p_max : float
        Declared evaluation range ``|p| <= p_max``.
    alpha, C1, C2, growth_q : float
        Convexity fraction and growth data; filled by :func:`hamiltonian`.
    """

    family: str
    q: float = 2.0
    coeff: CoefficientField | None = None
    offset: float = 0.0
    axis: int = 0
    p_max: float = P_MAX_DEFAULT
    alpha: float = 1.0
    C1: float = 1.0
    C2: float = 0.0
    growth_q: float = 1.0
    custom: Callable | None = field(default=None, compare=False)

    # -- structure ------------------------------------------------------
    @property
    def code(self) -> int:
        if self.family not in FAMILY_CODES:
            raise ValueError(f"family {self.family!r} has no grid kernel")
        return FAMILY_CODES[self.family]

    @property
    def homogeneous(self) -> bool:
        return self.family not in ("eikonal_potential", "isotropic_front")

    @property
    def convex(self) -> bool:
        return self.family != "ohta_kawasaki" and not (self.family == "power" and self.q < 1)

    @property
    def dim(self) -> int:
        return 2 if self.family == "abs_component" and self.axis == 1 else 1

    def coefficient_on_grid(self, n: int) -> np.ndarray:
        if self.coeff is None:
            return np.zeros(n)
        return self.coeff.on_grid(n)

    # -- evaluation -----------------------------------------------------
    def _base(self, p, c):
        f = self.family
        if f == "zero":
            return 0.0 * p
        if f == "power":
            return np.abs(p) ** self.q
        if f == "graph_mcf":
            return np.sqrt(1.0 + p * p) - 1.0
        if f == "ohta_kawasaki":
            return _ok_h(p)
        if f == "quadratic":
            return 0.5 * p * p
        if f == "eikonal_potential":
            return 0.5 * p * p - c
        if f == "isotropic_front":
            return c * np.sqrt(1.0 + p * p)
        if f == "abs_component":
            return np.abs(p)
        if f == "custom":
            return self.custom(p)
        raise ValueError(f"unknown Hamiltonian family {self.family!r}")

    def __call__(self, p, x=None) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        c = 0.0
        if not self.homogeneous:
            if x is None:
                raise ValueError(f"{self.family} needs the space variable x")
            c = self.coeff(x)
        return self._base(p, c) + self.offset

    def dp(self, p, x=None) -> np.ndarray:
        """Derivative in ``p``."""
        p = np.asarray(p, dtype=float)
        f = self.family
        if f == "zero":
            return 0.0 * p
        if f == "power":
            return self.q * np.sign(p) * np.abs(p) ** (self.q - 1.0)
        if f == "graph_mcf":
            return p / np.sqrt(1.0 + p * p)
        if f == "ohta_kawasaki":
            return 0.5 * p * (1.0 + p * p) ** -0.75
        if f in ("quadratic", "eikonal_potential"):
            return p
        if f == "isotropic_front":
            return self.coeff(x) * p / np.sqrt(1.0 + p * p)
        if f == "abs_component":
            return np.sign(p)
        h = 1e-6
        return (self.custom(p + h) - self.custom(p - h)) / (2 * h)

    def dpp(self, p) -> np.ndarray:
        """Second derivative in ``p`` of the homogeneous part."""
        p = np.asarray(p, dtype=float)
        f = self.family
        if f == "power":
            q = self.q
            with np.errstate(divide="ignore"):
                return q * (q - 1.0) * np.abs(p) ** (q - 2.0)
        if f == "graph_mcf":
            return (1.0 + p * p) ** -1.5
        if f == "ohta_kawasaki":
            return (1.0 + p * p) ** -1.75 * (0.5 - 0.25 * p * p)
        if f in ("quadratic", "eikonal_potential"):
            return np.ones_like(p)
        if f == "zero":
            return np.zeros_like(p)
        raise ValueError(f"second derivative unavailable for {self.family}")

    def h1(self, p) -> np.ndarray:
        """Convex part ``H1`` of the split (homogeneous families)."""
        p = np.asarray(p, dtype=float)
        if self.family == "ohta_kawasaki":
            return _ok_h1(p)
        return self._base(p, 0.0)

    def h2(self, p) -> np.ndarray:
        """Convex part ``H2 = H1 - H`` of the split (homogeneous families)."""
        p = np.asarray(p, dtype=float)
        if self.family == "ohta_kawasaki":
            return _ok_h1(p) - _ok_h(p)
        return np.zeros_like(p)

    def lipschitz(self, p_bound: float, coeff_max: float | None = None) -> float:
        """Upper bound of ``|dH/dp|`` on ``|p| <= p_bound``."""
        p_bound = min(float(p_bound), self.p_max)
        f = self.family
        if f == "zero":
            return 0.0
        if f == "power":
            return self.q * p_bound ** (self.q - 1.0) if p_bound > 0 else 0.0
        if f in ("graph_mcf", "abs_component"):
            return 1.0 if f == "abs_component" else p_bound / math.sqrt(1 + p_bound**2)
        if f == "ohta_kawasaki":
            ps = np.linspace(0, p_bound, 257)
            return float(np.max(np.abs(self.dp(ps))))
        if f in ("quadratic", "eikonal_potential"):
            return p_bound
        if f == "isotropic_front":
            amax = coeff_max if coeff_max is not None else float(np.max(np.abs(self.coeff.on_grid(1024))))
            return amax * p_bound / math.sqrt(1 + p_bound**2)
        ps = np.linspace(-p_bound, p_bound, 1025)
        return float(np.max(np.abs(self.dp(ps))))

    def describe(self) -> dict:
        d = {"family": self.family, "offset": self.offset, "p_max": self.p_max,
             "alpha": self.alpha, "C1": self.C1, "C2": self.C2, "growth_q": self.growth_q}
        if self.family == "power":
            d["q"] = self.q
        if self.coeff is not None:
            d["coeff"] = {"key": self.coeff.key, "amp": self.coeff.amp, "offset": self.coeff.offset}
        if self.family == "abs_component":
            d["axis"] = self.axis
        return d


HAMILTONIAN_KEYS = tuple(k for k in FAMILY_CODES) + ("custom",)


def _ok_split_constants(p_max: float) -> tuple[float, float, float]:
    ps = np.linspace(1e-3, p_max, 20001)
    alpha = float(np.min(_ok_h(ps) / _ok_h1(ps)))
    # linear growth of H1: slope at the end of the range, offset from the worst point
    C1 = float(_ok_h1(p_max) / p_max) * 0.9
    C2 = float(np.max(ps - _ok_h1(ps) / C1))
    return alpha, C1, max(C2, 0.0)


def hamiltonian(key: str, *, q: float = 2.0, coeff: CoefficientField | str | None = None,
                amp: float = 1.0, coeff_offset: float = 0.0, raw: bool = False,
                axis: int = 0, p_max: float = P_MAX_DEFAULT) -> HamiltonianSpec:
    """Build a catalog Hamiltonian with its split and growth data.

    Parameters
    ----------
    key : str
        Catalog key (see :data:`HAMILTONIAN_KEYS`).
    q : float
        Exponent for ``power``.
    coeff : CoefficientField or str, optional
        Coefficient for the x-dependent families; a string selects a preset
        with ``amp`` and ``coeff_offset``.
    raw : bool
        For ``graph_mcf`` and ``ohta_kawasaki``, return the unshifted form
        ``sqrt(1 + p**2)`` or ``(1 + p**2)**0.25`` (``H(0) = 1``).
    """
    if isinstance(coeff, str):
        coeff = CoefficientField(coeff, amp=amp, offset=coeff_offset)
    offset = 1.0 if raw and key in ("graph_mcf", "ohta_kawasaki") else 0.0
    if key == "power":
        if q < 1:
            raise ValueError("power Hamiltonian needs q >= 1")
        return HamiltonianSpec("power", q=q, p_max=p_max, C1=1.0, C2=0.0, growth_q=q)
    if key == "graph_mcf":
        return HamiltonianSpec("graph_mcf", offset=offset, p_max=p_max, C1=1.0, C2=1.0, growth_q=1.0)
    if key == "ohta_kawasaki":
        alpha, C1, C2 = _ok_split_constants(p_max)
        return HamiltonianSpec("ohta_kawasaki", offset=offset, p_max=p_max, alpha=alpha,
                               C1=C1, C2=C2, growth_q=1.0)
    if key == "quadratic":
        return HamiltonianSpec("quadratic", p_max=p_max, C1=0.5, C2=0.0, growth_q=2.0)
    if key == "eikonal_potential":
        coeff = coeff or CoefficientField("sin2")
        vmax = float(np.max(coeff.on_grid(4096)))
        return HamiltonianSpec("eikonal_potential", coeff=coeff, p_max=p_max, C1=0.5,
                               C2=max(2.0 * vmax, 0.0), growth_q=2.0)
    if key == "isotropic_front":
        coeff = coeff or CoefficientField("cos_front", amp=0.5, offset=1.0)
        amin = float(np.min(coeff.on_grid(4096)))
        if amin <= 0:
            raise ValueError("isotropic_front needs a positive coefficient a(x)")
        return HamiltonianSpec("isotropic_front", coeff=coeff, p_max=p_max, C1=amin,
                               C2=0.0, growth_q=1.0)
    if key == "abs_component":
        return HamiltonianSpec("abs_component", axis=axis, p_max=p_max, C1=1.0, C2=0.0, growth_q=1.0)
    if key == "zero":
        return HamiltonianSpec("zero", p_max=p_max, C1=0.0, C2=0.0, growth_q=1.0)
    raise ValueError(f"unknown Hamiltonian key {key!r}")


def evaluate(H: HamiltonianSpec, x, p) -> np.ndarray:
    """``H(x, p)`` with a range check ``|p| <= H.p_max``."""
    pa = np.asarray(p, dtype=float)
    if np.any(np.abs(pa) > H.p_max):
        raise ValueError(f"|p| exceeds the declared range {H.p_max}")
    return H(pa, x)


def gauge_shift(H_raw: HamiltonianSpec | Callable) -> tuple[HamiltonianSpec, float]:
    """Remove the constant ``H(0)`` and report it as the shift.

    Solvers evolve the shifted Hamiltonian and add ``shift * (xi(t) - xi(t0))``
    back to reported states; derivatives in ``p`` are untouched.
    """
    if isinstance(H_raw, HamiltonianSpec):
        if not H_raw.homogeneous:
            raise ValueError("gauge shift applies to x-independent Hamiltonians")
        h0 = float(H_raw(0.0))
        return replace(H_raw, offset=H_raw.offset - h0), h0
    h0 = float(H_raw(0.0))

    def shifted(p, _f=H_raw, _h0=h0):
        return _f(np.asarray(p, dtype=float)) - _h0

    return HamiltonianSpec("custom", custom=shifted, C1=0.0), h0


# ---------------------------------------------------------------------------
# Legendre transform


def power_conjugate_constant(q: float) -> float:
    """``C_q`` in ``sup_p (p v - |p|**q) = C_q |v|**(q/(q-1))``."""
    if q <= 1:
        raise ValueError("q must exceed 1")
    return (q - 1.0) * q ** (-q / (q - 1.0))


def legendre_numeric(h: Callable, v: float, p_max: float = P_MAX_DEFAULT,
                     n_grid: int = 20001) -> float:
    """``sup_{|p| <= p_max} (p v - h(p))`` by grid search plus bounded refinement.

    Returns ``inf`` when the maximizer sits on the boundary of the range with
    the objective still increasing (``v`` outside the effective domain).
    """
    ps = np.linspace(-p_max, p_max, n_grid)
    vals = ps * v - h(ps)
    k = int(np.argmax(vals))
    if k in (0, n_grid - 1):
        return math.inf
    lo, hi = ps[k - 1], ps[k + 1]
    res = optimize.minimize_scalar(lambda p: -(p * v - float(h(p))), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-12})
    return float(max(vals[k], -res.fun))


def legendre_transform(H: HamiltonianSpec, v) -> np.ndarray | float:
    """Convex conjugate ``L(v)`` of a convex homogeneous catalog member.

    Closed forms: ``power`` (``C_q |v|**(q/(q-1))``, indicator of
    ``|v| <= 1`` for ``q = 1``), ``quadratic`` (``v**2 / 2``), ``graph_mcf``
    (``1 - sqrt(1 - v**2)`` on ``|v| <= 1``), ``abs_component`` (indicator).
    Entries outside the effective domain are ``inf``.  An offset ``k`` in
    ``H`` shifts ``L`` by ``-k``.
    """
    if not H.homogeneous or not H.convex:
        raise ValueError("Legendre transform needs a convex x-independent Hamiltonian")
    va = np.asarray(v, dtype=float)
    f = H.family
    if f == "power" and H.q > 1:
        out = power_conjugate_constant(H.q) * np.abs(va) ** (H.q / (H.q - 1.0))
    elif f in ("abs_component",) or (f == "power" and H.q == 1):
        out = np.where(np.abs(va) <= 1.0, 0.0, np.inf)
    elif f == "quadratic":
        out = 0.5 * va * va
    elif f == "graph_mcf":
        with np.errstate(invalid="ignore"):
            out = np.where(np.abs(va) <= 1.0, 1.0 - np.sqrt(np.clip(1.0 - va * va, 0, None)), np.inf)
    elif f == "zero":
        out = np.where(va == 0.0, 0.0, np.inf)
    else:
        h = H.custom if f == "custom" else (lambda p: H(p))
        out = np.vectorize(lambda w: legendre_numeric(h, w, H.p_max))(va)
        return out if np.ndim(out) else float(out)
    out = out - H.offset
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# dissipation fluxes


@dataclass(frozen=True)
class DissipationSpec:
    """Flux ``F`` of the parabolic term ``d/dx F(u_x)``.

    Families
    --------
    ``zero``: ``F = 0``.  ``linear``: ``delta * p``.  ``arctan``:
    ``delta * arctan(p)`` (one-dimensional graph mean curvature).
    ``power``: ``p * |p|**(alpha - 1)``.  ``porous_medium``: same flux with
    exponent ``m`` in ``(0, 2)``.  ``bump``: ``F' = a * exp(-p**2 / (2 w**2))``,
    a bounded smooth bump with ``sup F''' = 2 a exp(-3/2) / w**2``.
    """

    family: str
    delta: float = 1.0
    alpha: float = 2.0
    a: float = 0.5
    w: float = 1.0

    @property
    def code(self) -> int:
        return FLUX_CODES[self.family]

    @property
    def exponent(self) -> float:
        return self.alpha

    @property
    def is_zero(self) -> bool:
        return self.family == "zero" or (self.family in ("linear", "arctan") and self.delta == 0)

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        f = self.family
        if f == "zero":
            return 0.0 * p
        if f == "linear":
            return self.delta * p
        if f == "arctan":
            return self.delta * np.arctan(p)
        if f in ("power", "porous_medium"):
            return np.sign(p) * np.abs(p) ** self.alpha
        if f == "bump":
            return self.a * self.w * math.sqrt(math.pi / 2) * special.erf(p / (math.sqrt(2) * self.w))
        raise ValueError(f"unknown dissipation family {self.family!r}")

    def dp(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        f = self.family
        if f == "zero":
            return 0.0 * p
        if f == "linear":
            return self.delta + 0.0 * p
        if f == "arctan":
            return self.delta / (1.0 + p * p)
        if f in ("power", "porous_medium"):
            return self.alpha * np.abs(p) ** (self.alpha - 1.0)
        if f == "bump":
            return self.a * np.exp(-p * p / (2 * self.w**2))
        raise ValueError(f"unknown dissipation family {self.family!r}")

    def max_slope(self, p_bound: float) -> float:
        """``max F'`` on ``|p| <= p_bound``."""
        f = self.family
        if f == "zero":
            return 0.0
        if f in ("linear", "arctan"):
            return self.delta
        if f in ("power", "porous_medium"):
            return self.alpha * p_bound ** (self.alpha - 1.0)
        return self.a

    @property
    def ellipticity(self) -> float:
        """Lower bound ``c`` with ``F' >= c`` on the whole line."""
        return self.delta if self.family == "linear" else 0.0

    @property
    def entropy_scale(self) -> float:
        """Constant ``k`` with ``E'' F' = k`` for the companion ``E``.

        The porous-medium companion is normalized as ``|r|**(3 - m)``, so
        ``k = m (2 - m) (3 - m)``; all other families use ``k = 1``.
        """
        if self.family == "porous_medium":
            m = self.alpha
            return m * (2.0 - m) * (3.0 - m)
        return 1.0

    def describe(self) -> dict:
        d = {"family": self.family}
        if self.family in ("linear", "arctan"):
            d["delta"] = self.delta
        if self.family == "power":
            d["alpha"] = self.alpha
        if self.family == "porous_medium":
            d["m"] = self.alpha
        if self.family == "bump":
            d.update(a=self.a, w=self.w)
        return d


DISSIPATION_KEYS = tuple(FLUX_CODES)


def dissipation(key: str, *, delta: float = 1.0, alpha: float = 2.0, m: float | None = None,
                a: float = 0.5, w: float = 1.0) -> DissipationSpec:
    """Build a catalog dissipation flux."""
    if key == "porous_medium":
        m = alpha if m is None else m
        if not 0 < m < 2:
            raise ValueError("porous medium exponent must lie in (0, 2)")
        return DissipationSpec("porous_medium", alpha=m)
    if key == "power" and alpha <= 1:
        raise ValueError("power flux needs alpha > 1")
    if key in ("linear", "arctan") and delta < 0:
        raise ValueError("delta must be non-negative")
    if key not in FLUX_CODES:
        raise ValueError(f"unknown dissipation key {key!r}")
    return DissipationSpec(key, delta=delta, alpha=alpha, a=a, w=w)


# ---------------------------------------------------------------------------
# derived functions


def g_transform(F: DissipationSpec, H: HamiltonianSpec, r: float) -> float:
    """``G(r) = int_0^r sqrt(F'(u) H''(u)) du`` (odd in ``r``).

    Closed forms for ``linear``/``quadratic``, ``linear``/``power`` and the pure power pair
    ``F = p**[alpha]``, ``H = |p|**beta`` where
    ``G(r) = sqrt(alpha beta (beta - 1)) * 2 / (alpha + beta - 1) * r**((alpha + beta - 1) / 2)``.
    Otherwise adaptive quadrature with absolute tolerance ``1e-10``.
    """
    r = float(r)
    if abs(r) > H.p_max:
        raise ValueError("r outside the declared range")
    sgn = 1.0 if r >= 0 else -1.0
    r = abs(r)
    if F.family == "linear" and H.family == "quadratic":
        return sgn * math.sqrt(F.delta) * r
    if F.family in ("power", "porous_medium") and H.family == "power" and H.q > 1:
        a, b = F.alpha, H.q
        k = math.sqrt(a * b * (b - 1.0)) * 2.0 / (a + b - 1.0)
        return sgn * k * r ** ((a + b - 1.0) / 2.0)
    if F.family == "linear" and H.family == "power" and H.q > 1:
        b = H.q
        return sgn * math.sqrt(F.delta * b * (b - 1.0)) * 2.0 / b * r ** (b / 2.0)

    def integrand(u):
        return math.sqrt(max(float(F.dp(u)) * float(H.dpp(u)), 0.0))

    val, _ = integrate.quad(integrand, 0.0, r, epsabs=1e-12, epsrel=1e-12, limit=200)
    return sgn * val


def entropy_companion(F: DissipationSpec, r) -> np.ndarray | float:
    """Convex ``E`` with ``E'' F' = F.entropy_scale`` and ``E(0) = E'(0) = 0``.

    Closed forms: ``linear`` ``r**2 / (2 delta)``; ``arctan``
    ``(r**2 / 2 + r**4 / 12) / delta``; ``power`` with ``alpha < 2``
    ``|r|**(3 - alpha) / (alpha (2 - alpha) (3 - alpha))``; ``porous_medium``
    ``|r|**(3 - m)``; ``bump`` by quadrature of ``(r - s) / F'(s)``.
    """
    ra = np.asarray(r, dtype=float)
    f = F.family
    if f == "zero" or F.is_zero:
        raise ValueError("F' vanishes identically; no entropy companion")
    if f == "linear":
        out = ra * ra / (2.0 * F.delta)
    elif f == "arctan":
        out = (ra**2 / 2.0 + ra**4 / 12.0) / F.delta
    elif f == "power":
        a = F.alpha
        if a >= 2:
            raise ValueError("1/F' is not locally integrable for alpha >= 2")
        out = np.abs(ra) ** (3.0 - a) / (a * (2.0 - a) * (3.0 - a))
    elif f == "porous_medium":
        out = np.abs(ra) ** (3.0 - F.alpha)
    else:
        def one(x):
            val, _ = integrate.quad(lambda s: (abs(x) - s) / float(F.dp(s)), 0.0, abs(x),
                                    epsabs=1e-12, epsrel=1e-12)
            return val
        out = np.vectorize(one)(ra)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# structural checks


def _second_differences(f, ps):
    h = ps[1] - ps[0]
    y = f(ps)
    return (y[2:] - 2 * y[1:-1] + y[:-2]) / h**2


def dc_check(H: HamiltonianSpec, p_range: float | None = None, n: int = 4001,
             tol: float = 1e-8) -> bool:
    """Sampled second differences of ``H1`` and ``H2`` are ``>= -tol``."""
    P = H.p_max if p_range is None else p_range
    ps = np.linspace(-P, P, n)
    ok1 = np.all(_second_differences(H.h1, ps) >= -tol)
    ok2 = np.all(_second_differences(H.h2, ps) >= -tol)
    return bool(ok1 and ok2)


def growth_check(H: HamiltonianSpec, p_range: float | None = None, n: int = 4001,
                 tol: float = 1e-8) -> bool:
    """``H1(p) - C1 (|p|**q - C2) >= -tol`` and ``H >= alpha H1`` on samples."""
    P = H.p_max if p_range is None else p_range
    ps = np.linspace(-P, P, n)
    h1 = H.h1(ps)
    grow = np.min(h1 - H.C1 * (np.abs(ps) ** H.growth_q - H.C2)) >= -tol
    frac = np.min(H.h1(ps) - H.h2(ps) - H.alpha * h1) >= -tol
    return bool(grow and frac)


def clamp_warning(count: int, where: str) -> None:
    if count:
        warnings.warn(f"{where}: {count} gradient values clamped to the declared range",
                      RuntimeWarning, stacklevel=3)
