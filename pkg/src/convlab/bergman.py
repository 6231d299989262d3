"""Weighted reproducing kernels on plane regions, by two independent routes.

For a weight ``w`` on a region of the complex plane, the space of holomorphic
functions with finite ``int |f|^2 e^{-w}`` has a reproducing kernel; its
diagonal ``B(z)`` is the largest value of ``|f(z)|^2`` over unit-norm
competitors.  The lab computes it two ways that share no code:

* **radial route** -- when the weight and region are rotation invariant the
  monomials are orthogonal, every moment is a one-dimensional integral, and
  ``B(z) = sum |z|^{2j} / m_j`` over the finite moments;
* **gram route** -- on an arbitrary bounded region, assemble the Gram matrix
  of the monomial basis by two-dimensional quadrature and evaluate
  ``B(z) = b(z)^H G^{-1} b(z)``.

Truncation makes both routes converge to the kernel from below (adding basis
functions enlarges the competitor space), so finite-degree values are honest
lower bounds.  The module also carries the diagnostics built on kernels: the
moment-divergence audit ("which monomials carry finite mass at all"), the
log-kernel curve along a base variable with its closed-form twin, mean-value
audits for subharmonicity, and a five-point Laplacian check against a closed
form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (DivergentIntegral, IllConditioned, InvalidParam,
                     MethodUnavailable, ZeroKernel)
from .geometry import (AffineFiberMap, Ball, Domain, Full, boundary_distance,
                       disc_region, fiber)
from .numerics import QuadConfig, integrate_1d, integrate_fiber, skirt_ladder
from .weights import RadialProfile, WeightField, lemma3_weight, psh_localizer

__all__ = [
    "MomentTable", "radial_moments", "bergman_radial",
    "GramKernel", "gram_kernel", "bergman_gram",
    "berndtsson_profile", "berndtsson_m0_closed", "berndtsson_phi_closed",
    "berndtsson_phi_curve", "berndtsson_inner_laplacian", "laplacian_check",
    "LaplacianRow", "psh_mean_value_check", "PshReport",
    "lemma2_harness", "Lemma2Row", "lemma3_harness", "Lemma3Row",
    "kernel_curve",
]

_COND_LIMIT = 1e12


# ---------------------------------------------------------------------------
# Radial route


@dataclass(frozen=True)
class MomentTable:
    """Monomial moments ``m_j = int |z|^{2j} e^{-w}`` with divergence flags."""

    values: tuple
    statuses: tuple  # "finite" | "divergent"
    label: str = ""

    def __post_init__(self):
        if len(self.values) != len(self.statuses):
            raise InvalidParam("values and statuses differ in length")
        if any(s not in ("finite", "divergent") for s in self.statuses):
            raise InvalidParam("statuses must be 'finite' or 'divergent'")

    def __len__(self) -> int:
        return len(self.values)

    def finite(self, j: int) -> bool:
        return self.statuses[j] == "finite"

    def to_csv(self) -> str:
        lines = ["k,value,status"]
        for j, (v, s) in enumerate(zip(self.values, self.statuses)):
            lines.append(f"{j},{repr(float(v))},{s}")
        return "\n".join(lines) + "\n"


def radial_moments(profile: RadialProfile, max_index: int,
                   cfg: QuadConfig | None = None) -> MomentTable:
    """Moments of a radial weight: ``m_j = 2 pi int r^{2j+1} e^{-profile(r)} dr``.

    On a bounded disc every moment is finite and all are computed in one
    vectorized pass.  On the full plane each moment is integrated separately
    and a diverging tail is recorded as status ``divergent`` instead of
    raising: which moments survive is a result, not an error.
    """
    if max_index < 0:
        raise InvalidParam("need max_index >= 0")
    js = np.arange(max_index + 1)
    seams = skirt_ladder(profile.seam_radii)

    if math.isfinite(profile.cutoff):
        def vec(r: float):
            return 2.0 * math.pi * r ** (2 * js + 1) * math.exp(-profile.fn(r))
        vals = integrate_1d(vec, 0.0, profile.cutoff, cfg, breakpoints=seams)
        vals = np.atleast_1d(np.asarray(vals, dtype=float))
        return MomentTable(values=tuple(float(v) for v in vals),
                           statuses=("finite",) * (max_index + 1),
                           label=profile.label)

    values, statuses = [], []
    for j in js:
        def one(r: float, jj=int(j)):
            return 2.0 * math.pi * r ** (2 * jj + 1) * math.exp(-profile.fn(r))
        try:
            values.append(float(integrate_1d(one, 0.0, math.inf, cfg,
                                             breakpoints=seams)))
            statuses.append("finite")
        except DivergentIntegral:
            values.append(math.inf)
            statuses.append("divergent")
    return MomentTable(values=tuple(values), statuses=tuple(statuses),
                       label=profile.label)


def bergman_radial(moments: MomentTable, rho: float = 0.0) -> float:
    """Kernel diagonal at radius rho from the moment table.

    ``B(rho) = sum rho^{2j} / m_j`` over the finite moments; divergent moments
    contribute nothing because their monomials are not in the space.  Raises
    ZeroKernel when no moment at all is finite -- the space holds only 0.
    """
    rho = float(rho)
    if rho < 0.0:
        raise InvalidParam("rho is a radius; need rho >= 0")
    finite = [(j, v) for j, (v, s) in enumerate(zip(moments.values, moments.statuses))
              if s == "finite"]
    if not finite:
        raise ZeroKernel("every moment diverges; the space contains only zero")
    total = 0.0
    for j, v in finite:
        if v <= 0.0:
            raise InvalidParam(f"moment {j} is not positive")
        total += rho ** (2 * j) / v
    return total


# ---------------------------------------------------------------------------
# Gram route


@dataclass(frozen=True)
class GramKernel:
    """Gram matrix of shifted monomials ``(z - center)^j`` under ``e^{-w}``."""

    matrix: np.ndarray
    center: complex
    cond: float
    label: str = ""

    @property
    def degree(self) -> int:
        return self.matrix.shape[0] - 1

    def value(self, z: complex | None = None) -> float:
        """Kernel diagonal ``B(z)`` for the truncated basis (a lower bound)."""
        z = self.center if z is None else complex(z)
        b = (z - self.center) ** np.arange(self.matrix.shape[0])
        sol = np.linalg.solve(self.matrix, b)
        return float(np.real(np.vdot(b, sol)))


def gram_kernel(w: WeightField, domain: Domain, t=(), center: complex = 0j,
                degree: int = 8, cfg: QuadConfig | None = None) -> GramKernel:
    """Assemble the monomial Gram matrix over the fiber of ``domain`` at t.

    The integrand is the full rank-one tensor ``b(z) b(z)^H e^{-w(t,z)}``
    integrated entrywise in one adaptive pass, then symmetrized.  A Cholesky
    failure or a condition number beyond 1e12 raises IllConditioned rather
    than returning a silently meaningless inverse.
    """
    if degree < 0:
        raise InvalidParam("need degree >= 0")
    if domain.kind != "complex" or domain.fiber_rdim != 2:
        raise InvalidParam("gram route needs a one-dimensional complex fiber")
    if (w.base_rdim, w.fiber_rdim) != (domain.base_rdim, domain.fiber_rdim):
        raise InvalidParam("weight split does not match the domain split")
    t = np.asarray(t, dtype=float).ravel()
    if t.size != domain.base_rdim:
        raise InvalidParam(f"expected a packed base point of {domain.base_rdim} reals")
    fib = fiber(domain, t)
    c = complex(center)
    js = np.arange(degree + 1)

    def tensor(x: np.ndarray):
        v = w.fn(np.concatenate([t, x]))
        if v == math.inf:
            return np.zeros((degree + 1, degree + 1), dtype=complex)
        b = (complex(x[0], x[1]) - c) ** js
        return np.outer(b, b.conj()) * math.exp(-v)

    gram = integrate_fiber(tensor, fib, cfg,
                           circle_seams=w.fiber_circle_seams(t))
    gram = np.asarray(gram, dtype=complex)
    gram = 0.5 * (gram + gram.conj().T)
    try:
        np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise IllConditioned("gram matrix is not positive definite "
                             "(degree too high for the mass present)") from exc
    cond = float(np.linalg.cond(gram))
    if cond > _COND_LIMIT:
        raise IllConditioned(f"gram matrix condition number {cond:.3e} exceeds "
                             f"{_COND_LIMIT:.0e}")
    return GramKernel(matrix=gram, center=c, cond=cond, label=w.label)


def bergman_gram(w: WeightField, domain: Domain, t=(), at: complex = 0j,
                 degree: int = 8, cfg: QuadConfig | None = None) -> float:
    """Kernel diagonal at ``at`` by the gram route (basis shifted to ``at``)."""
    return gram_kernel(w, domain, t, center=at, degree=degree, cfg=cfg).value(at)


# ---------------------------------------------------------------------------
# The log-dent weight family: closed forms and curves


def berndtsson_profile(z: complex, eps: float) -> RadialProfile:
    """Fiber profile of the log dent weight at base point z.

    ``r -> (3/2) log(1 + | |z|^2 + r^2 - eps^2 |)`` on the whole plane, with
    the kink radius registered when the base point sits inside the dent.
    """
    if not (0.0 < eps < 1.0):
        raise InvalidParam("needs eps in (0, 1)")
    c = abs(complex(z)) ** 2 - eps * eps
    seams = (math.sqrt(-c),) if c < 0.0 else ()
    return RadialProfile(
        fn=lambda r: 1.5 * math.log1p(abs(c + r * r)),
        cutoff=math.inf, seam_radii=seams,
        label=f"logdent(|z|={abs(complex(z)):g})",
    )


def berndtsson_m0_closed(z_abs: float, eps: float) -> float:
    """Closed-form mass of the log dent fiber: derived by the substitution
    u = r^2, which makes the integrand an exact power of (1 + |c + u|)."""
    if not (0.0 < eps < 1.0):
        raise InvalidParam("needs eps in (0, 1)")
    z_abs = abs(float(z_abs))
    if z_abs >= eps:
        return 2.0 * math.pi / math.sqrt(1.0 - eps * eps + z_abs * z_abs)
    return 4.0 * math.pi - 2.0 * math.pi / math.sqrt(1.0 + eps * eps - z_abs * z_abs)


def berndtsson_phi_closed(z_abs: float, eps: float) -> float:
    """Closed form of the log-kernel curve ``-log B(z) = log m_0(z)`` ... with
    the sign convention that the curve is minus the log of the fiber mass."""
    return -math.log(berndtsson_m0_closed(z_abs, eps))


def berndtsson_phi_curve(eps: float, z_abs_list, cfg: QuadConfig | None = None) -> list:
    """Quadrature route for the log-kernel curve: ``-log m_0`` per base point.

    Shares no arithmetic with the closed form; agreement of the two is one of
    the package's primary cross-checks.
    """
    out = []
    for za in z_abs_list:
        mt = radial_moments(berndtsson_profile(complex(abs(float(za)), 0.0), eps), 0, cfg)
        if not mt.finite(0):
            raise DivergentIntegral("fiber mass diverged; no curve value")
        out.append(-math.log(mt.values[0]))
    return out


def berndtsson_inner_laplacian(z_abs: float, eps: float) -> float:
    """Closed-form Laplacian (d^2/dz dzbar) of the inner-branch log-kernel curve.

    Valid for |z| < eps, where the curve is ``-log(2 - 1/sqrt(1+eps^2-|z|^2))``
    up to an additive constant.  Strict positivity of this expression on the
    whole dent is what rules out any harmonic repair of the curve.
    """
    if not (0.0 < eps < 1.0):
        raise InvalidParam("needs eps in (0, 1)")
    za = abs(float(z_abs))
    if za >= eps:
        raise InvalidParam("closed form only holds strictly inside the dent")
    q = 1.0 + eps * eps - za * za
    s = math.sqrt(q)
    num = (2.0 + 2.0 * eps * eps + za * za) * s - (1.0 + eps * eps)
    den = 2.0 * q * q * (2.0 * s - 1.0) ** 2
    return num / den


@dataclass(frozen=True)
class LaplacianRow:
    z_abs: float
    numeric: float
    closed: float
    error: float

    def to_jsonable(self) -> dict:
        return {"z_abs": self.z_abs, "numeric": self.numeric,
                "closed": self.closed, "error": self.error}


def laplacian_check(eps: float, z_abs_list, h: float = 1e-3,
                    u: Callable[[complex], float] | None = None) -> list:
    """Five-point stencil Laplacian of the inner log-kernel branch vs closed form.

    ``u`` defaults to the inner-branch curve itself; each probe point must
    keep the whole stencil strictly inside the dent.  Rows carry the stencil
    value, the closed form, and their gap -- O(h^2) when both are right.
    """
    if h <= 0.0:
        raise InvalidParam("stencil step must be positive")
    if u is None:
        def u(z: complex) -> float:
            return -math.log(2.0 - 1.0 / math.sqrt(1.0 + eps * eps - abs(z) ** 2))
    rows = []
    for za in z_abs_list:
        za = abs(float(za))
        if za + 2.0 * h >= eps:
            raise InvalidParam(f"stencil at |z|={za:g} leaves the dent (eps={eps:g})")
        z = complex(za, 0.0)
        stencil = (u(z + h) + u(z - h) + u(z + 1j * h) + u(z - 1j * h) - 4.0 * u(z))
        numeric = stencil / (4.0 * h * h)
        closed = berndtsson_inner_laplacian(za, eps)
        rows.append(LaplacianRow(z_abs=za, numeric=numeric, closed=closed,
                                 error=abs(numeric - closed)))
    return rows


# ---------------------------------------------------------------------------
# Subharmonicity audit


@dataclass(frozen=True)
class PshReport:
    checked: int
    worst_deficit: float
    witness: Optional[tuple]
    tol: float
    verdict: bool

    def to_jsonable(self) -> dict:
        return {"checked": self.checked, "worst_deficit": self.worst_deficit,
                "witness": None if self.witness is None else list(self.witness),
                "tol": self.tol, "verdict": self.verdict}


def psh_mean_value_check(u: Callable[[complex], float], centers, radii,
                         n_angles: int = 1024, tol: float = 0.0) -> PshReport:
    """Sub-mean-value audit: ``u(c) <= circle average`` for every (c, radius).

    The worst deficit ``u(c) - average`` over all probes is reported; a
    positive deficit beyond tol is a certified subharmonicity failure at the
    witness (center, radius).  Uniform angles make the average a trapezoid
    rule, spectrally accurate for smooth circle restrictions.
    """
    if n_angles < 8:
        raise InvalidParam("need at least 8 angles")
    angles = np.exp(2j * math.pi * np.arange(n_angles) / n_angles)
    worst = -math.inf
    witness = None
    checked = 0
    for c in centers:
        c = complex(c)
        uc = float(u(c))
        for rho in radii:
            rho = float(rho)
            if rho <= 0.0:
                raise InvalidParam("probe radii must be positive")
            mean = float(np.mean([u(c + rho * a) for a in angles]))
            deficit = uc - mean
            checked += 1
            if deficit > worst:
                worst = deficit
                witness = (c.real, c.imag, rho)
    return PshReport(checked=checked, worst_deficit=worst, witness=witness,
                     tol=float(tol), verdict=bool(worst <= tol))


# ---------------------------------------------------------------------------
# Localized-kernel harnesses


@dataclass(frozen=True)
class Lemma2Row:
    k: int
    value: float
    target: float
    error: float
    upper: float

    def to_jsonable(self) -> dict:
        return {"k": self.k, "value": self.value, "target": self.target,
                "error": self.error, "upper": self.upper}


def lemma2_harness(profile: RadialProfile, ks,
                   cfg: QuadConfig | None = None) -> list:
    """Localized kernel values at the center of a radial weight, per sharpness.

    For each k the log-cone penalty of sharpness k is added to the profile and
    the kernel diagonal at 0 is computed by the radial route (``1/m_0``).  The
    target is ``e^{profile(0)}``; the certified finite-k upper bound is
    ``exp(max of the profile on the penalty's flat disc of radius 1/k)``.
    """
    target = math.exp(profile(0.0))
    rows = []
    for k in ks:
        k = int(k)
        if k < 3:
            raise InvalidParam("need k >= 3 for integrable plane penalties")
        lb = math.log(math.pi) - 2.0 * math.log(k)

        def cone(r: float, kf=float(k), lb=lb) -> float:
            return kf * math.log(kf * r) + lb if r * kf > 1.0 else lb

        combined = RadialProfile(
            fn=lambda r, cone=cone: profile.fn(r) + cone(r),
            cutoff=profile.cutoff,
            seam_radii=tuple(profile.seam_radii) + (1.0 / k,),
            label=profile.label,
        )
        mt = radial_moments(combined, 0, cfg)
        if not mt.finite(0):
            raise DivergentIntegral("localized mass diverged")
        value = 1.0 / mt.values[0]
        grid = np.linspace(0.0, 1.0 / k, 2049)
        upper = math.exp(max(profile.fn(float(r)) for r in grid))
        rows.append(Lemma2Row(k=k, value=value, target=target,
                              error=abs(value - target), upper=upper))
    return rows


@dataclass(frozen=True)
class Lemma3Row:
    k: int
    lower: float
    value: float
    upper: Optional[float]

    def to_jsonable(self) -> dict:
        return {"k": self.k, "lower": self.lower, "value": self.value,
                "upper": self.upper}


def lemma3_harness(ks, r: float, domain: Domain | None = None,
                   degree: int = 8, cfg: QuadConfig | None = None) -> list:
    """Kernel bounds for the log shell weight on a plane region.

    For each sharpness k the kernel diagonal at 0 under ``e^{-shell_k}`` is
    computed by the gram route and bracketed by two closed-route bounds: the
    constant competitor ``1/int e^{-shell_k}`` from below, and from above --
    valid once the shell radius ball sits inside the region and k exceeds
    2 -- the reciprocal mass ``1/(pi r^2)`` of the limit disc.  The upper
    bound is omitted (None) when its validity conditions fail.
    """
    if domain is None:
        domain = disc_region(1.0)
    if domain.kind != "complex" or domain.base_rdim != 0 or domain.fiber_rdim != 2:
        raise InvalidParam("needs a pure plane region")
    ball_fits = boundary_distance(domain, (0.0, 0.0)).value >= float(r)
    rows = []
    for k in ks:
        k = int(k)
        w = lemma3_weight(k, r)
        fib = fiber(domain, ())

        def density(x: np.ndarray, w=w) -> float:
            return math.exp(-w.fn(x))

        mass = integrate_fiber(density, fib, cfg,
                               circle_seams=w.fiber_circle_seams(()))
        lower = 1.0 / mass
        value = bergman_gram(w, domain, degree=degree, cfg=cfg)
        upper = 1.0 / (math.pi * r * r) if (ball_fits and k > 2) else None
        rows.append(Lemma3Row(k=k, lower=lower, value=value, upper=upper))
    return rows


# ---------------------------------------------------------------------------
# Kernel curves along the base


def _pack_base(domain: Domain, t) -> np.ndarray:
    if domain.kind == "complex" and isinstance(t, complex):
        return np.array([t.real, t.imag], dtype=float)
    return np.atleast_1d(np.asarray(t, dtype=float)).ravel()


def kernel_curve(w: WeightField, domain: Domain, a: AffineFiberMap, k: int,
                 taus, method: str = "radial", degree: int = 8,
                 cfg: QuadConfig | None = None) -> list:
    """Localized kernel diagonal ``B(a(tau))`` along the base, per tau.

    Adds the log-cone penalty of sharpness k about the moving center and
    evaluates the kernel at the center by the requested route.  The radial
    route needs the combined weight to be rotation invariant about a(tau) and
    the fiber to be a full plane or a disc centered there; anything else
    raises MethodUnavailable so a silently wrong fast path cannot exist.
    """
    if domain.kind != "complex" or domain.fiber_rdim != 2:
        raise InvalidParam("kernel curves need one-dimensional complex fibers")
    psi = psh_localizer(k, a)
    combined = w + psi
    out = []
    for tau in taus:
        t = _pack_base(domain, tau)
        if method == "radial":
            if combined.radial_fn is None:
                raise MethodUnavailable(
                    "weight is not rotation invariant about the moving center")
            node = fiber(domain, t).node
            center = a.at(t)
            if isinstance(node, Full):
                cutoff = math.inf
            elif (isinstance(node, Ball) and tuple(node.axes) == (0, 1)
                  and np.allclose(node.center, center)):
                cutoff = node.radius
            else:
                raise MethodUnavailable(
                    "fiber is not a plane or a disc centered on the moving center")
            prof = RadialProfile(
                fn=lambda rr, t=t: combined.radial_fn(t, rr),
                cutoff=cutoff,
                seam_radii=combined.seam_radii_at(t),
            )
            mt = radial_moments(prof, 0, cfg)
            if not mt.finite(0):
                raise DivergentIntegral("localized mass diverged")
            out.append(1.0 / mt.values[0])
        elif method == "gram":
            c = a.at(t)
            out.append(bergman_gram(combined, domain, t,
                                    at=complex(c[0], c[1]), degree=degree, cfg=cfg))
        else:
            raise MethodUnavailable(f"no kernel route named {method!r}")
    return out
