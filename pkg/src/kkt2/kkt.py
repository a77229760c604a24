"""First-order certification: multiplier polytope and constraint qualifications.

The multiplier set is parameterized by mu alone (lambda is eliminated
through stationarity, lambda(mu) = -f'(x) - sum_i mu_i g_i'(x)), which makes
it an H-polytope in R^m and turns sup-over-multipliers questions into LPs.

Surjectivity-type constraint qualifications are decided by polarity: a
polyhedral cone difference equals the whole space iff only nu = 0 satisfies
the polar system, which is probed with 2m LPs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import InfeasiblePoint, UsageError
from .cones import (
    FREE,
    NONNEG,
    NONPOS,
    ZERO,
    SignPatternCone,
    absorb_rows,
    tangent_cone_K,
    normal_cone_box,
    tangent_cone_box,
)
from .linalg import (
    LinearProgram,
    PolytopeH,
    cone_is_trivial,
    enumerate_vertices,
    feasible_point,
    recession_cone_trivial,
    solve_lp,
    weighted_norm,
)
from .model import (
    ActiveSetInfo,
    BoxSet,
    ProblemSpec,
    as_entries,
    check_feasible,
)

Row = tuple[np.ndarray, float]


@dataclass(frozen=True)
class Multipliers:
    """A single multiplier pair (lambda, mu) at a base point."""

    lam: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        lam.flags.writeable = False
        mu.flags.writeable = False
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)


@dataclass(frozen=True)
class MultiplierSet:
    """The multiplier polytope at x, over mu, with lambda eliminated."""

    x: np.ndarray
    f_grad: np.ndarray
    g_grads: np.ndarray  # m x n
    polytope: PolytopeH
    empty: bool
    bounded: bool
    vertices: tuple[np.ndarray, ...]
    info: ActiveSetInfo

    @property
    def m(self) -> int:
        return self.g_grads.shape[0]

    def lam_of(self, mu) -> np.ndarray:
        mu = np.asarray(mu, dtype=float)
        return -self.f_grad - self.g_grads.T @ mu

    def multipliers(self, mu) -> Multipliers:
        return Multipliers(self.lam_of(mu), np.asarray(mu, dtype=float))

    def contains_mu(self, mu, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        if self.m == 0:
            return not self.empty
        return self.polytope.contains(np.asarray(mu, dtype=float), tol)


def _mu_sign_rows(p: ProblemSpec, info: ActiveSetInfo) -> tuple[list[Row], list[Row]]:
    """mu_i = 0 on inactive inequalities, mu_i >= 0 on active ones."""
    m = p.n_constraints
    eq: list[Row] = []
    ineq: list[Row] = []
    for i in info.inactive:
        e = np.zeros(m)
        e[i] = 1.0
        eq.append((e, 0.0))
    for i in info.active:
        if i >= p.m1:
            e = np.zeros(m)
            e[i] = -1.0
            ineq.append((e, 0.0))
    return eq, ineq


def _lambda_pattern_rows(
    p: ProblemSpec,
    x: np.ndarray,
    f_grad: np.ndarray,
    G: np.ndarray,
    tol: Tolerances,
) -> tuple[list[Row], list[Row]]:
    """Rows in mu expressing lambda(mu) in the normal cone of the abstract set."""

    m = G.shape[0]
    eq: list[Row] = []
    ineq: list[Row] = []
    if isinstance(p.abstract_set, BoxSet):
        normal = normal_cone_box(p.abstract_set, x, tol)
        for j in range(p.dim):
            code = int(normal.codes[j])
            if code == FREE:
                continue
            # lambda_j(mu) = -f'_j - sum_i mu_i G_ij
            coef = -G[:, j]
            rhs = f_grad[j]
            if code == NONPOS:  # lambda_j <= 0
                ineq.append((coef, rhs))
            elif code == NONNEG:  # lambda_j >= 0
                ineq.append((-coef, -rhs))
            else:  # ZERO
                eq.append((coef, rhs))
                # encoded as one equality row
    else:
        w = p.weights
        for d in p.abstract_set.normal_row_rays():
            # <lambda(mu), d>_w <= 0
            coef = np.array([-float(np.sum(w * G[i] * d)) for i in range(m)])
            rhs = float(np.sum(w * f_grad * d))
            ineq.append((coef, rhs))
    return eq, ineq


def multiplier_set(
    p: ProblemSpec, x, tol: Tolerances = DEFAULT_TOLERANCES
) -> MultiplierSet:
    """Construct Lambda(x) as an H-polytope over mu; enumerate vertices when
    the set is bounded and the constraint count allows it."""

    v = as_entries(x, p.dim)
    feas = check_feasible(p, v, tol)
    if not feas.feasible:
        raise InfeasiblePoint("multiplier set requested at an infeasible point")
    info = feas.info
    assert info is not None

    f_grad = np.asarray(p.objective.gradient(v), dtype=float)
    m = p.n_constraints
    G = np.array(p.constraint_gradients(v)).reshape(m, p.dim) if m else np.zeros((0, p.dim))

    if m == 0:
        lam = -f_grad
        ok = _lambda_in_normal_cone(p, v, lam, tol)
        poly = PolytopeH(0)
        verts = (np.zeros(0),) if ok else ()
        return MultiplierSet(v, f_grad, G, poly, empty=not ok, bounded=True,
                             vertices=verts, info=info)

    sign_eq, sign_ineq = _mu_sign_rows(p, info)
    pat_eq, pat_ineq = _lambda_pattern_rows(p, v, f_grad, G, tol)
    poly = PolytopeH(m, tuple(sign_eq + pat_eq), tuple(sign_ineq + pat_ineq)).cleaned(tol)

    empty = feasible_point(poly, tol) is None
    bounded = False if empty else recession_cone_trivial(poly, tol)
    vertices: tuple[np.ndarray, ...] = ()
    if not empty and bounded and m <= 12:
        vertices = tuple(enumerate_vertices(poly, tol))
    return MultiplierSet(v, f_grad, G, poly, empty=empty, bounded=bounded,
                         vertices=vertices, info=info)


def _lambda_in_normal_cone(
    p: ProblemSpec, x: np.ndarray, lam: np.ndarray, tol: Tolerances
) -> bool:
    if isinstance(p.abstract_set, BoxSet):
        return normal_cone_box(p.abstract_set, x, tol).contains(lam, tol.residual)
    w = p.weights
    scale = tol.residual * (1.0 + float(np.max(np.abs(lam), initial=0.0)))
    return all(
        float(np.sum(w * lam * d)) <= scale * (1.0 + float(np.max(np.abs(d))))
        for d in p.abstract_set.normal_row_rays()
    )


def validate_multipliers(
    p: ProblemSpec, x, mult: Multipliers, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """Stationarity residual of (lambda, mu); raises on sign violations."""

    v = as_entries(x, p.dim)
    feas = check_feasible(p, v, tol)
    if not feas.feasible or feas.info is None:
        raise InfeasiblePoint("multipliers validated at an infeasible point")
    info = feas.info
    f_grad = np.asarray(p.objective.gradient(v), dtype=float)
    G = np.array(p.constraint_gradients(v)).reshape(p.n_constraints, p.dim) \
        if p.n_constraints else np.zeros((0, p.dim))
    resid_vec = f_grad + mult.lam + (G.T @ mult.mu if p.n_constraints else 0.0)
    residual = weighted_norm(p.weights, resid_vec)
    if residual > tol.residual * (1.0 + weighted_norm(p.weights, f_grad)):
        raise UsageError(f"stationarity residual {residual:.3e} too large")
    for i in info.inactive:
        if abs(mult.mu[i]) > tol.residual:
            raise UsageError(f"mu[{i}] must vanish on an inactive constraint")
    for i in info.active:
        if i >= p.m1 and mult.mu[i] < -tol.residual:
            raise UsageError(f"mu[{i}] must be nonnegative on an active inequality")
    if not _lambda_in_normal_cone(p, v, mult.lam, tol):
        raise UsageError("lambda violates the normal-cone pattern")
    return residual


def lagrangian_value(p: ProblemSpec, x, mult: Multipliers) -> float:
    """f(x) + <lambda, x>_w + sum_i mu_i g_i(x)."""
    v = as_entries(x, p.dim)
    base = p.objective.value(v) + p.inner(mult.lam, v)
    if p.n_constraints:
        base += float(mult.mu @ p.constraint_values(v))
    return float(base)


# --------------------------------------------------------------------------
# Constraint qualifications
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CQVerdict:
    name: str
    holds: bool
    witness: Optional[np.ndarray] = None
    achieved_cone: Optional[str] = None


def _nu_rows_box(
    c_pattern: SignPatternCone, G: np.ndarray
) -> tuple[list[Row], list[Row]]:
    """Rows of {nu : sum_i nu_i g_i' lies in the polar of the given
    (tangent-side) pattern cone}."""
    eq: list[Row] = []
    ineq: list[Row] = []
    polar = c_pattern.polar()
    for j in range(G.shape[1]):
        code = int(polar.codes[j])
        if code == FREE:
            continue
        coef = G[:, j]
        if code == NONPOS:
            ineq.append((coef, 0.0))
        elif code == NONNEG:
            ineq.append((-coef, 0.0))
        else:
            eq.append((coef, 0.0))
    return eq, ineq


def _nu_rows_hull(
    rays: tuple[np.ndarray, ...], G: np.ndarray, weights: np.ndarray
) -> list[Row]:
    rows: list[Row] = []
    for d in rays:
        coef = np.array([float(np.sum(weights * G[i] * d)) for i in range(G.shape[0])])
        rows.append((coef, 0.0))
    return rows


def _nu_rows_K(
    k_pattern: SignPatternCone,
) -> tuple[list[Row], list[Row]]:
    """Rows of {nu : -nu in polar(k_pattern)} in nu-space."""
    m = k_pattern.dim
    eq: list[Row] = []
    ineq: list[Row] = []
    polar = k_pattern.polar()
    for i in range(m):
        code = int(polar.codes[i])
        e = np.zeros(m)
        e[i] = 1.0
        if code == FREE:
            continue
        if code == NONPOS:  # -nu_i <= 0  =>  nu_i >= 0
            ineq.append((-e, 0.0))
        elif code == NONNEG:  # -nu_i >= 0 => nu_i <= 0
            ineq.append((e, 0.0))
        else:  # -nu_i = 0
            eq.append((e, 0.0))
    return eq, ineq


def _surjectivity_check(
    p: ProblemSpec,
    x: np.ndarray,
    c_pattern: Optional[SignPatternCone],
    c_rays: Optional[tuple[np.ndarray, ...]],
    k_pattern: SignPatternCone,
    name: str,
    tol: Tolerances,
) -> CQVerdict:
    """Cone difference g'(x)[C-cone] - [K-cone] = R^m iff the polar system in
    nu has only the trivial solution."""

    m = p.n_constraints
    if m == 0:
        return CQVerdict(name, True)
    G = np.array(p.constraint_gradients(x)).reshape(m, p.dim)
    if c_pattern is not None:
        eq_c, ineq_c = _nu_rows_box(c_pattern, G)
    else:
        assert c_rays is not None
        eq_c, ineq_c = [], _nu_rows_hull(c_rays, G, p.weights)
    eq_k, ineq_k = _nu_rows_K(k_pattern)
    trivial, witness = cone_is_trivial(m, eq_c + eq_k, ineq_c + ineq_k, tol)
    return CQVerdict(name, trivial, witness=witness)


def check_rzkcq(
    p: ProblemSpec, x, tol: Tolerances = DEFAULT_TOLERANCES
) -> CQVerdict:
    """g'(x) R_C(x) - R_K(g(x)) = R^m, via the polar probe."""
    v = as_entries(x, p.dim)
    feas = check_feasible(p, v, tol)
    if not feas.feasible or feas.info is None:
        raise InfeasiblePoint("CQ check at an infeasible point")
    k_pattern = tangent_cone_K(p, feas.info).pattern(p.n_constraints)
    if isinstance(p.abstract_set, BoxSet):
        return _surjectivity_check(
            p, v, tangent_cone_box(p.abstract_set, v, tol), None, k_pattern, "rzkcq", tol
        )
    rays = p.abstract_set.rays + p.abstract_set.deep_rays
    return _surjectivity_check(p, v, None, rays, k_pattern, "rzkcq", tol)


def check_weaker_cq(
    p: ProblemSpec, x, tol: Tolerances = DEFAULT_TOLERANCES
) -> CQVerdict:
    """Tangent-cone variant g'(x) T_C(x) - T_K(g(x)) = R^m; for boxes the
    radial and tangent cones share the sign pattern, so the verdict always
    matches check_rzkcq there."""
    v = as_entries(x, p.dim)
    feas = check_feasible(p, v, tol)
    if not feas.feasible or feas.info is None:
        raise InfeasiblePoint("CQ check at an infeasible point")
    k_pattern = tangent_cone_K(p, feas.info).pattern(p.n_constraints)
    if isinstance(p.abstract_set, BoxSet):
        return _surjectivity_check(
            p, v, tangent_cone_box(p.abstract_set, v, tol), None, k_pattern, "weaker", tol
        )
    rays = p.abstract_set.normal_row_rays()
    return _surjectivity_check(p, v, None, rays, k_pattern, "weaker", tol)


def _axis_reachability(
    p: ProblemSpec,
    x: np.ndarray,
    c_pattern: Optional[SignPatternCone],
    kept_rays: Optional[list[np.ndarray]],
    k_pattern: SignPatternCone,
    axis: int,
    direction: float,
    tol: Tolerances,
) -> bool:
    """Is direction * e_axis in g'(x)[C-section] - [K-section]?"""

    m = p.n_constraints
    G = np.array(p.constraint_gradients(x)).reshape(m, p.dim)
    target = np.zeros(m)
    target[axis] = direction
    if c_pattern is not None:
        n = p.dim
        # variables (h, z)
        dim = n + m
        eq: list[Row] = []
        ineq: list[Row] = []
        for j in range(n):
            code = int(c_pattern.codes[j])
            e = np.zeros(dim)
            e[j] = 1.0
            if code == NONNEG:
                ineq.append((-e, 0.0))
            elif code == NONPOS:
                ineq.append((e, 0.0))
            elif code == ZERO:
                eq.append((e, 0.0))
        for i in range(m):
            code = int(k_pattern.codes[i])
            e = np.zeros(dim)
            e[n + i] = 1.0
            if code == NONNEG:
                ineq.append((-e, 0.0))
            elif code == NONPOS:
                ineq.append((e, 0.0))
            elif code == ZERO:
                eq.append((e, 0.0))
        for i in range(m):
            row = np.concatenate([p.weights * G[i], -np.eye(m)[i]])
            eq.append((row, target[i]))
        res = solve_lp(LinearProgram(np.zeros(dim), tuple(eq), tuple(ineq)), tol)
        return res.is_optimal
    assert kept_rays is not None
    K = len(kept_rays)
    dim = K + m
    eq = []
    ineq = []
    for k in range(K):
        e = np.zeros(dim)
        e[k] = -1.0
        ineq.append((e, 0.0))
    for i in range(m):
        code = int(k_pattern.codes[i])
        e = np.zeros(dim)
        e[K + i] = 1.0
        if code == NONNEG:
            ineq.append((-e, 0.0))
        elif code == NONPOS:
            ineq.append((e, 0.0))
        elif code == ZERO:
            eq.append((e, 0.0))
    for i in range(m):
        coefs = np.array([float(np.sum(p.weights * G[i] * d)) for d in kept_rays])
        row = np.concatenate([coefs, -np.eye(m)[i]])
        eq.append((row, target[i]))
    res = solve_lp(LinearProgram(np.zeros(dim), tuple(eq), tuple(ineq)), tol)
    return res.is_optimal


def check_strict_cq(
    p: ProblemSpec, x, mult: Multipliers, tol: Tolerances = DEFAULT_TOLERANCES
) -> CQVerdict:
    """Strict qualification: g'(x)[T_C(x) ∩ lambda-annihilator] minus
    [T_K(g(x)) ∩ mu-annihilator] must be all of R^m.

    The annihilator sections are pattern cones again (each annihilating row
    has single-signed terms, so it absorbs), and the verdict is the same
    polar probe.  On failure the achieved cone is described by per-axis
    reachability; for m = 1 that is one of {0}, (-inf,0], [0,inf), R.
    """

    v = as_entries(x, p.dim)
    validate_multipliers(p, v, mult, tol)
    feas = check_feasible(p, v, tol)
    assert feas.info is not None
    m = p.n_constraints
    k_base = tangent_cone_K(p, feas.info).pattern(m)
    k_section, eq_left, _ = absorb_rows(k_base, [mult.mu], [], np.ones(m))
    if eq_left:
        raise UsageError("mu-annihilator section did not absorb; invalid multipliers")

    kept_rays: Optional[list[np.ndarray]] = None
    c_section: Optional[SignPatternCone] = None
    if isinstance(p.abstract_set, BoxSet):
        t_pattern = tangent_cone_box(p.abstract_set, v, tol)
        c_section, eq_left, _ = absorb_rows(t_pattern, [mult.lam], [], p.weights)
        if eq_left:
            raise UsageError("lambda-annihilator section did not absorb; invalid multipliers")
        verdict = _surjectivity_check(p, v, c_section, None, k_section, "strict", tol)
    else:
        scale = 1e-9
        rays = p.abstract_set.tangent_rays()
        kept_rays = [
            d for d in rays
            if abs(float(np.sum(p.weights * mult.lam * d))) <= scale * (1.0 + float(np.max(np.abs(d))))
        ]
        verdict = _surjectivity_check(p, v, None, tuple(kept_rays), k_section, "strict", tol)

    if verdict.holds:
        return verdict

    axes = []
    for i in range(m):
        plus = _axis_reachability(p, v, c_section, kept_rays, k_section, i, +1.0, tol)
        minus = _axis_reachability(p, v, c_section, kept_rays, k_section, i, -1.0, tol)
        axes.append((plus, minus))
    if m == 1:
        plus, minus = axes[0]
        desc = {(True, True): "R", (False, True): "(-inf, 0]",
                (True, False): "[0, inf)", (False, False): "{0}"}[(plus, minus)]
    else:
        desc = "; ".join(
            f"axis {i}: +{'yes' if pl else 'no'}/-{'yes' if mi else 'no'}"
            for i, (pl, mi) in enumerate(axes)
        )
    return CQVerdict("strict", False, witness=verdict.witness, achieved_cone=desc)


# --------------------------------------------------------------------------
# Stationarity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FOCResult:
    stationary: bool
    multipliers: Optional[MultiplierSet]
    residual: float
    best_mu: Optional[np.ndarray] = None


def _normal_cone_violation(
    p: ProblemSpec, x: np.ndarray, lam: np.ndarray, tol: Tolerances
) -> float:
    """Weighted-L2 distance from lam to the normal cone of the abstract set."""

    if isinstance(p.abstract_set, BoxSet):
        normal = normal_cone_box(p.abstract_set, x, tol)
        viol = np.zeros(p.dim)
        for j in range(p.dim):
            code = int(normal.codes[j])
            if code == NONPOS:
                viol[j] = max(lam[j], 0.0)
            elif code == NONNEG:
                viol[j] = max(-lam[j], 0.0)
            elif code == ZERO:
                viol[j] = lam[j]
        return weighted_norm(p.weights, viol)
    # Dykstra projection onto the intersection of half-spaces <.,d>_w <= 0
    rays = p.abstract_set.normal_row_rays()
    w = p.weights
    y = lam.copy()
    corrections = [np.zeros_like(lam) for _ in rays]
    for _ in range(500):
        for idx, d in enumerate(rays):
            z = y + corrections[idx]
            dd = float(np.sum(w * d * d))
            if dd <= 0:
                continue
            excess = max(float(np.sum(w * z * d)), 0.0) / dd
            proj = z - excess * d
            corrections[idx] = z - proj
            y = proj
    return weighted_norm(p.weights, lam - y)


def foc_residual(
    p: ProblemSpec, x, tol: Tolerances = DEFAULT_TOLERANCES
) -> FOCResult:
    """Stationary iff the multiplier set is nonempty; otherwise reports the
    best stationarity residual over admissible mu (coordinate descent on a
    convex piecewise-quadratic merit)."""

    v = as_entries(x, p.dim)
    mset = multiplier_set(p, v, tol)
    if not mset.empty:
        return FOCResult(True, mset, 0.0)

    m = p.n_constraints
    f_grad = mset.f_grad
    G = mset.g_grads
    info = mset.info

    def lam_of(mu):
        return -f_grad - (G.T @ mu if m else 0.0)

    def merit(mu):
        return _normal_cone_violation(p, v, lam_of(mu), tol)

    mu = np.zeros(m)
    free_idx = [i for i in range(m) if i < p.m1 or i in info.active]
    nonneg = {i for i in info.active if i >= p.m1}
    best = merit(mu)
    for _sweep in range(60):
        improved = False
        for i in free_idx:
            lo = 0.0 if i in nonneg else -1e3
            hi = 1e3
            a, b = lo, hi
            for _ in range(80):  # golden-section on a convex slice
                m1p = a + 0.381966 * (b - a)
                m2p = b - 0.381966 * (b - a)
                mu1 = mu.copy()
                mu1[i] = m1p
                mu2 = mu.copy()
                mu2[i] = m2p
                if merit(mu1) <= merit(mu2):
                    b = m2p
                else:
                    a = m1p
            cand = mu.copy()
            cand[i] = 0.5 * (a + b)
            val = merit(cand)
            if val < best - 1e-14:
                best = val
                mu = cand
                improved = True
        if not improved:
            break
    return FOCResult(False, None, best, best_mu=mu if m else None)
