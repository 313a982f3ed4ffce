"""Weighted Sturm-Liouville solves for the wave-mode equation.

Two independent routes to the principal eigenvalue mu(lambda) of

    (a^3 M')' = -mu d^2 a M on (-1, 0),   a^3 M'(0) = (g d^3 / p0^2) M(0),
    M(-1) = 0,           with a(lambda, p) = sqrt(Gamma(p) + lambda):

* a piecewise-linear finite element discretization of the variational
  quotient, with every vorticity jump and every minimizer of Gamma placed
  on the mesh, Richardson extrapolation over a nested refinement, and a
  tridiagonal Rayleigh-quotient iteration seeded by a coarse dense solve;

* a Pruefer-angle shooting method integrating theta' = cos^2(theta)/a^3 +
  mu d^2 a sin^2(theta) from theta(-1) = 0.  The surface condition pins
  theta(0) = atan(p0^2 / (g d^3)) modulo pi, theta(0) grows strictly with
  mu, and floor(theta(0)/pi) counts interior zeros, so the bracketed root
  is guaranteed to be the eigenvalue of the requested index.

A wave mode with integer wavenumber k >= 1 exists at lambda exactly when
mu(lambda) = -k^2.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    BracketFailure,
    EigenFailure,
    NoModeSolution,
    NonAdmissibleLambda,
    ZeroDenominator,
)
from .numerics import (
    QuadratureSpec,
    RootSpec,
    adaptive_quad,
    bracketed_root,
    count_pencil_eigenvalues_below,
    smallest_eigenpair_tridiagonal,
    smallest_generalized_eigenpair,
)
from .vorticity import FlowParameters, GammaProfile

_GQ_N = 8
_GQ_X, _GQ_W = np.polynomial.legendre.leggauss(_GQ_N)
_GQS_X, _GQS_W = np.polynomial.legendre.leggauss(12)

_COARSE_POINTS = 201


@dataclass(frozen=True)
class ModeSolution:
    """Eigenpair of the mode equation at fixed lambda.

    ``mu`` is the Rayleigh quotient of the stored nodal eigenfunction M
    (so the quotient identity holds to round-off); ``mu_refined`` is the
    Richardson-extrapolated eigenvalue used for curves and root finding.
    ``k`` is the associated wavenumber for pinned mode solves, 0 otherwise.
    ``flux`` holds the conserved combination a^3 M_p at the nodes.
    """

    lam: float
    k: int
    mu: float
    mu_refined: float
    nodes: np.ndarray
    M: np.ndarray
    flux: np.ndarray


def _check_admissible(profile: GammaProfile, lam: float):
    if not lam > profile.min_lambda:
        raise NonAdmissibleLambda(
            f"lambda={lam!r} not above floor {profile.min_lambda!r}"
        )


def build_mesh(profile: GammaProfile, lam: float, n_points: int) -> np.ndarray:
    """Mesh on [-1, 0] containing every jump and minimizer of Gamma.

    When lambda sits close to the admissibility floor the segments touching
    a minimizer are graded quadratically toward it.
    """
    anchors = sorted({-1.0, 0.0, *profile.jump_points, *profile.minimizers})
    margin = lam - profile.min_lambda
    grade = margin < 1e-3 * max(1.0, abs(profile.gamma_min))
    mins = set(profile.minimizers)
    total = anchors[-1] - anchors[0]
    pieces = []
    for aL, aR in zip(anchors[:-1], anchors[1:]):
        n_seg = max(4, int(round((n_points - 1) * (aR - aL) / total)))
        u = np.linspace(0.0, 1.0, n_seg + 1)
        if grade and aL in mins and aR in mins:
            half = np.linspace(0.0, 1.0, (n_seg + 1) // 2 + 1)
            left = aL + 0.5 * (aR - aL) * half**2
            right = aR - 0.5 * (aR - aL) * half[::-1] ** 2
            x = np.unique(np.concatenate([left, right]))
        elif grade and aL in mins:
            x = aL + (aR - aL) * u**2
        elif grade and aR in mins:
            x = aR - (aR - aL) * (1.0 - u) ** 2
        else:
            x = aL + (aR - aL) * u
        pieces.append(x)
    nodes = np.unique(np.concatenate(pieces))
    nodes[0] = -1.0
    nodes[-1] = 0.0
    return nodes


def refine_mesh(nodes: np.ndarray) -> np.ndarray:
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    return np.sort(np.concatenate([nodes, mids]))


def _element_integrals(profile: GammaProfile, lam: float, nodes: np.ndarray):
    """Per-element integrals of a^3 and of a against the P1 basis products.

    Returns (s1, m00, m01, m11) with s1 = int a^3, m.. = int a N_i N_j on
    each element; elements touching a minimizer of Gamma are integrated in
    the substituted variable t = sqrt(|p - p*|).
    """
    nodes = np.asarray(nodes, dtype=float)
    lo, hi = nodes[:-1], nodes[1:]
    h = hi - lo
    X = 0.5 * (lo + hi)[:, None] + 0.5 * h[:, None] * _GQ_X[None, :]
    W = 0.5 * h[:, None] * _GQ_W[None, :]
    aval = np.sqrt(lam + profile.primitive(X.ravel()).reshape(X.shape))
    a3 = aval**3
    n0 = (hi[:, None] - X) / h[:, None]
    n1 = (X - lo[:, None]) / h[:, None]
    s1 = np.sum(W * a3, axis=1)
    m00 = np.sum(W * aval * n0 * n0, axis=1)
    m01 = np.sum(W * aval * n0 * n1, axis=1)
    m11 = np.sum(W * aval * n1 * n1, axis=1)

    mins = np.asarray(profile.minimizers if profile.minimizers else (profile.p1,))
    left_hit = np.min(np.abs(lo[:, None] - mins[None, :]), axis=1) < 1e-14
    right_hit = np.min(np.abs(hi[:, None] - mins[None, :]), axis=1) < 1e-14
    for e in np.nonzero(left_hit | right_hit)[0]:
        width = math.sqrt(h[e])
        t = 0.5 * width * (_GQS_X + 1.0)
        xs = lo[e] + t * t if left_hit[e] else hi[e] - t * t
        ws = 0.5 * width * _GQS_W * 2.0 * t
        av = np.sqrt(lam + profile.primitive(xs))
        a3v = av**3
        n0v = (hi[e] - xs) / h[e]
        n1v = (xs - lo[e]) / h[e]
        s1[e] = np.sum(ws * a3v)
        m00[e] = np.sum(ws * av * n0v * n0v)
        m01[e] = np.sum(ws * av * n0v * n1v)
        m11[e] = np.sum(ws * av * n1v * n1v)
    return s1, m00, m01, m11


def _bands_from_integrals(ints, h: np.ndarray, flow: FlowParameters):
    """Tridiagonal (A, B) bands from per-element integrals.

    A = p0^2 * (a^3-weighted stiffness) - g d^3 at the surface node;
    B = p0^2 d^2 * (a-weighted mass).  Node 0 (the bed) is still included;
    solvers drop it to enforce M(-1) = 0.
    """
    s1, m00, m01, m11 = ints
    n = len(h) + 1
    k_e = s1 / (h * h)
    dK = np.zeros(n)
    dK[:-1] += k_e
    dK[1:] += k_e
    eK = -k_e
    dM = np.zeros(n)
    dM[:-1] += m00
    dM[1:] += m11
    eM = m01.copy()

    p0sq = flow.p0**2
    dA = p0sq * dK
    eA = p0sq * eK
    dA[-1] -= flow.g * flow.d**3
    dB = p0sq * flow.d**2 * dM
    eB = p0sq * flow.d**2 * eM
    return dA, eA, dB, eB


def assemble(
    profile: GammaProfile, flow: FlowParameters, lam: float, nodes: np.ndarray
):
    """Tridiagonal (A, B) bands of the quotient on the given mesh."""
    nodes = np.asarray(nodes, dtype=float)
    ints = _element_integrals(profile, lam, nodes)
    return _bands_from_integrals(ints, np.diff(nodes), flow)


def _quotient_from_integrals(ints, h, M, flow) -> float:
    """Quotient of a nodal P1 function from element-wise energies.

    Summing positive per-element energies avoids the cancellation that the
    assembled 1/h-scaled matrix entries would introduce.
    """
    s1, m00, m01, m11 = ints
    slope = np.diff(M) / h
    stiff = float(np.sum(s1 * slope * slope))
    v0 = M[:-1]
    v1 = M[1:]
    mass = float(np.sum(m00 * v0 * v0 + 2.0 * m01 * v0 * v1 + m11 * v1 * v1))
    if mass <= 1e-300:
        raise ZeroDenominator("mass quadratic form vanished")
    p0sq = flow.p0**2
    num = p0sq * stiff - flow.g * flow.d**3 * M[-1] ** 2
    return num / (p0sq * flow.d**2 * mass)


def _energy_quotient(
    profile: GammaProfile,
    flow: FlowParameters,
    lam: float,
    nodes: np.ndarray,
    M: np.ndarray,
) -> float:
    ints = _element_integrals(profile, lam, nodes)
    return _quotient_from_integrals(ints, np.diff(nodes), M, flow)


def _bands_to_dense(d, e):
    m = np.diag(d)
    m += np.diag(e, 1)
    m += np.diag(e, -1)
    return m


def _bisect_smallest(dA, eA, dB, eB, rel_tol=1e-3):
    """Rough smallest pencil eigenvalue by Sylvester-count bisection.

    Cheap O(n) per step and BLAS-free, used only to seed the Rayleigh
    quotient iteration inside its basin of attraction.
    """
    def count(tau):
        return count_pencil_eigenvalues_below(dA, eA, dB, eB, tau)

    if count(0.0) >= 1:
        hi = 0.0
        lo = -1.0
        while count(lo) >= 1:
            hi = lo
            lo *= 4.0
            if lo < -1e14:
                raise EigenFailure("bisection found no lower bound on the spectrum")
    else:
        lo = 0.0
        hi = 1.0
        while count(hi) < 1:
            lo = hi
            hi *= 4.0
            if hi > 1e14:
                raise EigenFailure("bisection found no upper bound on the spectrum")
    while hi - lo > rel_tol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if count(mid) >= 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _solve_level(profile, flow, lam, nodes, sigma0, v0):
    """One mesh level: banded RQI with dense fallback.

    Returns (mu, M_full) where mu is the element-energy quotient of the
    surface-normalized eigenfunction (the value whose Rayleigh identity is
    exact) and M_full includes the bed node M(-1) = 0.
    """
    nodes = np.asarray(nodes, dtype=float)
    h = np.diff(nodes)
    ints = _element_integrals(profile, lam, nodes)
    dA, eA, dB, eB = _bands_from_integrals(ints, h, flow)
    try:
        _, v = smallest_eigenpair_tridiagonal(
            dA[1:], eA[1:], dB[1:], eB[1:], sigma0, v0
        )
    except EigenFailure:
        _, v = smallest_generalized_eigenpair(
            _bands_to_dense(dA[1:], eA[1:]), _bands_to_dense(dB[1:], eB[1:])
        )
    M = np.concatenate([[0.0], v])
    if abs(M[-1]) > 1e-9 * np.max(np.abs(M)):
        M = M / M[-1]
    return _quotient_from_integrals(ints, h, M, flow), M


def _nodal_flux(profile, lam, nodes, M):
    """a^3 M_p at the nodes from element fluxes, averaged at interior nodes."""
    h = np.diff(nodes)
    mid = 0.5 * (nodes[:-1] + nodes[1:])
    a_mid = np.sqrt(lam + profile.primitive(mid))
    w_el = a_mid**3 * np.diff(M) / h
    w = np.empty(len(nodes))
    w[0] = w_el[0]
    w[-1] = w_el[-1]
    w[1:-1] = 0.5 * (w_el[:-1] + w_el[1:])
    return w


def principal_eigen(
    profile: GammaProfile,
    flow: FlowParameters,
    lam: float,
    mesh_points: int = 2001,
) -> ModeSolution:
    """Principal eigenpair (mu(lambda), M) of the mode-equation quotient.

    A coarse inertia-count bisection seeds a tridiagonal Rayleigh-quotient
    iteration on the working mesh and its uniform refinement; the two
    levels give a Richardson-extrapolated ``mu_refined`` while the stored M
    and ``mu`` come from the finer level.  M is normalized to M(0) = 1.
    """
    _check_admissible(profile, lam)
    coarse = build_mesh(profile, lam, min(_COARSE_POINTS, mesh_points))
    dA, eA, dB, eB = assemble(profile, flow, lam, coarse)
    sigma0 = _bisect_smallest(dA[1:], eA[1:], dB[1:], eB[1:])
    mu_c, m_c = _solve_level(profile, flow, lam, coarse, sigma0, None)

    fine = build_mesh(profile, lam, mesh_points)
    mu_f, m_f = _solve_level(
        profile, flow, lam, fine, mu_c, np.interp(fine[1:], coarse, m_c)
    )
    finer = refine_mesh(fine)
    mu_2, m_2 = _solve_level(
        profile, flow, lam, finer, mu_f, np.interp(finer[1:], fine, m_f)
    )
    mu_refined = mu_2 + (mu_2 - mu_f) / 3.0

    flux = _nodal_flux(profile, lam, finer, m_2)
    return ModeSolution(
        lam=lam,
        k=0,
        mu=mu_2,
        mu_refined=mu_refined,
        nodes=finer,
        M=m_2,
        flux=flux,
    )


def rayleigh_quotient(
    profile: GammaProfile,
    flow: FlowParameters,
    lam: float,
    phi,
    phi_p: Callable[[float], float] | None = None,
) -> float:
    """Quotient F(lambda, phi) whose infimum over {phi(-1)=0} is mu(lambda).

    ``phi`` may be a ModeSolution (evaluated through the same element
    quadrature as the solver, so the identity F(M) == mu is exact to
    round-off) or a callable with optional analytic derivative ``phi_p``
    (central differences otherwise).
    """
    _check_admissible(profile, lam)
    d = flow.d
    g = flow.g
    p0sq = flow.p0**2
    if isinstance(phi, ModeSolution):
        return _energy_quotient(profile, flow, lam, phi.nodes, phi.M)

    if phi_p is None:
        def phi_p(p, _h=1e-6):
            x = min(max(p, -1.0 + _h), -_h)
            return (phi(x + _h) - phi(x - _h)) / (2.0 * _h)

    bps = tuple(
        sorted(
            {j for j in profile.jump_points}
            | {m for m in profile.minimizers if -1.0 < m < 0.0}
        )
    )
    spec = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11, breakpoints=bps)

    def num_int(p):
        a = np.sqrt(lam + profile.primitive(p))
        dphi = np.asarray([phi_p(x) for x in np.atleast_1d(p)])
        return (a**3 * dphi.reshape(np.shape(p))) * dphi.reshape(np.shape(p))

    def den_int(p):
        a = np.sqrt(lam + profile.primitive(p))
        val = np.asarray([phi(x) for x in np.atleast_1d(p)]).reshape(np.shape(p))
        return a * val * val

    stiff = adaptive_quad(num_int, -1.0, 0.0, spec)
    mass = adaptive_quad(den_int, -1.0, 0.0, spec)
    if mass <= 1e-30:
        raise ZeroDenominator("integral of a*phi^2 is numerically zero")
    num = -g * d**3 * float(phi(0.0)) ** 2 + p0sq * stiff
    return num / (p0sq * d**2 * mass)


def _scalar_gamma_primitive(profile: GammaProfile):
    """Fast scalar closure for Gamma(p), for ODE right-hand sides."""
    knots = [float(x) for x in profile._knots]
    g0 = [float(x) for x in profile._g0]
    g1 = [float(x) for x in profile._g1]
    jk = [float(x) for x in profile._jknots]
    scale = profile._scale
    j_end = jk[-1]
    nmax = len(g0) - 1

    def gamma_of(p: float) -> float:
        j = bisect.bisect_right(knots, p) - 1
        if j < 0:
            j = 0
        elif j > nmax:
            j = nmax
        dp = p - knots[j]
        return scale * (jk[j] + g0[j] * dp + 0.5 * g1[j] * dp * dp - j_end)

    return gamma_of


def _prufer_angle(profile, flow, lam, mu) -> float:
    """theta(0) for the angle ODE started at theta(-1) = 0.

    Integration restarts at every vorticity jump and Gamma minimizer so the
    one-step method never crosses a kink of the coefficients.
    """
    gamma_of = _scalar_gamma_primitive(profile)
    d2 = flow.d**2
    stops = sorted(
        {-1.0, 0.0}
        | {float(j) for j in profile.jump_points}
        | {float(m) for m in profile.minimizers if -1.0 < m < 0.0}
    )

    def rhs(p, th):
        a = math.sqrt(lam + gamma_of(p))
        s = math.sin(th[0])
        c = math.cos(th[0])
        return [c * c / (a * a * a) + mu * d2 * a * s * s]

    theta = 0.0
    for aL, aR in zip(stops[:-1], stops[1:]):
        sol = solve_ivp(
            rhs,
            (aL, aR),
            [theta],
            method="DOP853",
            rtol=1e-11,
            atol=1e-12,
        )
        if not sol.success:
            raise EigenFailure(f"angle integration failed on [{aL}, {aR}]")
        theta = float(sol.y[0, -1])
    return theta


def shooting_mu(
    profile: GammaProfile,
    flow: FlowParameters,
    lam: float,
    k: int = 0,
) -> float:
    """Eigenvalue of index ``k`` (0 = principal) by Pruefer shooting.

    Independent of the finite element route: an initial value problem in
    the Pruefer angle plus a bracketed root solve in mu.  The angle at the
    surface increases strictly with mu and equals
    atan(p0^2/(g d^3)) + k pi exactly at the index-k eigenvalue, which also
    certifies that the eigenfunction has k interior zeros.
    """
    _check_admissible(profile, lam)
    if k < 0:
        raise ValueError("k must be >= 0")
    c_surf = flow.g * flow.d**3 / flow.p0**2
    target = math.atan2(1.0, c_surf) + k * math.pi

    def mismatch(mu):
        return _prufer_angle(profile, flow, lam, mu) - target

    r0 = mismatch(0.0)
    if r0 == 0.0:
        return 0.0
    if r0 < 0.0:
        lo, f_lo = 0.0, r0
        step = 1.0
        while True:
            hi = step
            f_hi = mismatch(hi)
            if f_hi >= 0.0:
                break
            lo, f_lo = hi, f_hi
            step *= 4.0
            if step > 1e9:
                raise BracketFailure("no eigenvalue bracket below mu = 1e9")
    else:
        hi, f_hi = 0.0, r0
        step = -1.0
        while True:
            lo = step
            f_lo = mismatch(lo)
            if f_lo <= 0.0:
                break
            hi, f_hi = lo, f_lo
            step *= 4.0
            if step < -1e9:
                raise BracketFailure("no eigenvalue bracket above mu = -1e9")
    spec = RootSpec(x_tol=1e-12 * max(1.0, abs(lo), abs(hi)), f_tol=1e-10, max_iter=300)
    mu = bracketed_root(mismatch, lo, hi, spec)
    zeros = int(math.floor((_prufer_angle(profile, flow, lam, mu) + 1e-9) / math.pi))
    if zeros != k:
        raise EigenFailure(
            f"shooting converged with {zeros} interior zeros, expected {k}"
        )
    return mu


def mode_k_solution(
    profile: GammaProfile,
    flow: FlowParameters,
    lam: float,
    k: int,
    mesh_points: int = 2001,
    tol: float = 1e-6,
) -> ModeSolution:
    """The wave mode of wavenumber k at lambda, when it exists.

    Exists exactly when the principal eigenvalue equals -k^2; the k = 0
    mode is always trivial (M == 0) and reported as NoModeSolution.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        raise NoModeSolution("the zero mode admits only M == 0")
    sol = principal_eigen(profile, flow, lam, mesh_points=mesh_points)
    if abs(sol.mu_refined + k * k) > tol * max(1.0, float(k * k)):
        raise NoModeSolution(
            f"principal eigenvalue {sol.mu_refined!r} != -{k * k} at lambda={lam!r}",
            mu=sol.mu_refined,
        )
    return replace(sol, k=k)


@dataclass(frozen=True)
class MuCurve:
    """Sampled (lambda, mu) pairs plus any monotonicity violations found."""

    points: tuple
    monotonicity_violations: tuple


def mu_curve(
    profile: GammaProfile,
    flow: FlowParameters,
    lambda_grid: Sequence[float],
    mesh_points: int = 2001,
) -> MuCurve:
    """mu(lambda) on a grid; flags non-monotone steps where mu < 0."""
    pts = []
    for lam in lambda_grid:
        sol = principal_eigen(profile, flow, lam, mesh_points=mesh_points)
        pts.append((float(lam), sol.mu_refined))
    pts.sort(key=lambda t: t[0])
    violations = []
    for (l1, m1), (l2, m2) in zip(pts[:-1], pts[1:]):
        if m1 < 0.0 and m2 < 0.0 and m2 <= m1 - 1e-10 * max(1.0, abs(m1)):
            violations.append((l1, l2, m1, m2))
    return MuCurve(points=tuple(pts), monotonicity_violations=tuple(violations))


def flux_jump_defect(mode: ModeSolution, profile: GammaProfile):
    """Largest mismatch of the one-sided fluxes a^3 M_p at vorticity jumps.

    Returns (max defect, widest element adjacent to a jump); the defect
    shrinks linearly with the mesh because the true flux is continuous.
    """
    nodes = mode.nodes
    h = np.diff(nodes)
    mid = 0.5 * (nodes[:-1] + nodes[1:])
    a_mid = np.sqrt(mode.lam + profile.primitive(mid))
    w_el = a_mid**3 * np.diff(mode.M) / h
    worst = 0.0
    width = 0.0
    for j in profile.jump_points:
        i = int(np.argmin(np.abs(nodes - j)))
        if not 0 < i < len(nodes) - 1:
            continue
        worst = max(worst, abs(w_el[i] - w_el[i - 1]))
        width = max(width, h[i - 1], h[i])
    return worst, width
