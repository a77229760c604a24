"""End-to-end certification chains for the built-in problems.

Each chain runs the full battery in the standard order (feasibility, FOC,
constraint qualifications, second-order checks), records raw verdicts, and
appends a final ``chain_expectations`` record comparing the outcomes against
the known certification profile of the built-in problem.  Any mismatch
fails that record.
"""

from __future__ import annotations

import time

import numpy as np

from ..config import DEFAULT_TOLERANCES, SearchBudget, Tolerances
from ..curvature import (
    check_snc,
    check_snc_fixed_multiplier,
    check_ssc,
    sample_growth,
)
from ..kkt import check_rzkcq, check_strict_cq, check_weaker_cq, foc_residual
from ..model import check_feasible, validate_derivatives
from ..report import (
    CertificationReport,
    CheckRecord,
    new_report,
    problem_digest,
    second_order_witness_dict,
)
from .example1 import Example1Problem, build_example1
from .example2 import (
    DELTA,
    Example2Problem,
    build_example2,
    verify_halfspace_representation,
    verify_section_membership,
)


def run_example1_certification(
    grid: int,
    budget: SearchBudget = SearchBudget(),
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[Example1Problem, CertificationReport]:
    """Chain: feasibility, derivative validation, RZK CQ, stationarity with
    the multiplier interval [0,1], coercive sufficient condition, sup-form
    necessary condition, and the demonstration that no single fixed
    multiplier satisfies the necessary condition on its own."""

    start = time.perf_counter()
    ex = build_example1(grid)
    p, x = ex.problem, ex.xbar
    report = new_report(
        f"example1(grid={grid})", problem_digest(f"example1:{grid}"), budget.seed, x
    )
    expect_ok = True

    feas = check_feasible(p, x, tol)
    report.add(CheckRecord(
        "feasibility",
        "pass" if feas.feasible else "infeasible",
        {"n_active": len(feas.info.active) if feas.info else 0},
    ))
    expect_ok &= feas.feasible

    deriv = validate_derivatives(p, x, tol)
    report.add(CheckRecord(
        "derivative_validation",
        "pass" if deriv.passed else "fail",
        {
            "max_gradient_error": max(r["gradient_max_error"] for r in deriv.per_function),
            "max_hessian_error": max(r["hessian_max_error"] for r in deriv.per_function),
        },
    ))
    expect_ok &= deriv.passed

    rz = check_rzkcq(p, x, tol)
    report.add(CheckRecord("rzkcq", "holds" if rz.holds else "violated", {}))
    weak = check_weaker_cq(p, x, tol)
    report.add(CheckRecord("weaker_cq", "holds" if weak.holds else "violated", {}))
    expect_ok &= rz.holds and weak.holds and (rz.holds == weak.holds)

    foc = foc_residual(p, x, tol)
    report.add(CheckRecord(
        "stationarity",
        "holds" if foc.stationary else "not_stationary",
        {"residual": foc.residual},
    ))
    expect_ok &= foc.stationary
    mset = foc.multipliers
    assert mset is not None

    vertices = sorted(float(v[0]) for v in mset.vertices)
    lam_interval = [min(vertices), max(vertices)] if vertices else []
    report.add(CheckRecord(
        "multiplier_set",
        "pass" if mset.bounded and len(vertices) == 2 else "fail",
        {
            "bounded": mset.bounded,
            "vertices": vertices,
            "lambda_interval": lam_interval,
        },
    ))
    expect_ok &= (
        mset.bounded
        and len(vertices) == 2
        and abs(vertices[0]) <= 1e-9
        and abs(vertices[1] - 1.0) <= 1e-9
    )

    hypo = tuple(
        f"{name} holds: multiplier set nonempty and bounded"
        for name, verdict in (("rzkcq", rz), ("weaker_cq", weak)) if verdict.holds
    )
    ssc = check_ssc(p, x, mset, eta=0.1, alpha_target=1.0, budget=budget, tol=tol,
                    hypotheses=hypo)
    report.add(CheckRecord(
        "ssc",
        "holds" if ssc.kind == "ssc_holds" else "violated",
        {
            "alpha_est": ssc.alpha_est,
            "directions": ssc.directions_evaluated,
            "positivity_consistent": ssc.positivity_consistent,
        },
        second_order_witness_dict(ssc),
        list(ssc.hypotheses),
    ))
    expect_ok &= ssc.kind == "ssc_holds" and abs((ssc.alpha_est or 0.0) - 1.0) <= 1e-6

    cone = ex.display_critical_cone(tol)
    snc = check_snc(p, x, mset, cone=cone, budget=budget, tol=tol, hypotheses=hypo)
    report.add(CheckRecord(
        "snc_sup",
        "holds" if snc.kind == "snc_holds" else "violated",
        {"sampled_min": snc.sampled_min, "directions": snc.directions_evaluated},
        second_order_witness_dict(snc),
        list(snc.hypotheses),
    ))
    expect_ok &= snc.kind == "snc_holds" and snc.sampled_min >= 1.0 - 1e-6

    gaps = []
    all_violated = True
    for mu_val in np.linspace(0.0, 1.0, 11):
        verdict = check_snc_fixed_multiplier(
            p, x, np.array([mu_val]), mset, cone=cone, budget=budget, tol=tol
        )
        violated = verdict.kind == "snc_violated"
        all_violated &= violated
        gaps.append({
            "mu": float(mu_val),
            "violated": violated,
            "witness": second_order_witness_dict(verdict),
        })
    report.add(CheckRecord(
        "fixed_multiplier_gap",
        "pass" if all_violated else "fail",
        {"n_multipliers_sampled": len(gaps)},
        {"per_multiplier": gaps},
    ))
    expect_ok &= all_violated

    report.add(CheckRecord("chain_expectations", "pass" if expect_ok else "fail", {}))
    report.wall_time_s = time.perf_counter() - start
    return ex, report


def run_example2_certification(
    trunc: int,
    budget: SearchBudget = SearchBudget(),
    tol: Tolerances = DEFAULT_TOLERANCES,
    growth_alpha: float = 0.1,
    growth_eps: float = 0.05,
    growth_samples: int = 2000,
) -> tuple[Example2Problem, CertificationReport]:
    """Chain: local-minimum consistency by growth sampling, RZK CQ, unique
    multiplier, the sup-form necessary condition violated along (0,1,0) with
    value -2*delta, and the strict qualification failing with achieved cone
    (-inf, 0]."""

    start = time.perf_counter()
    ex = build_example2(trunc)
    p, x = ex.problem, ex.xbar
    report = new_report(
        f"example2(trunc={trunc})", problem_digest(f"example2:{trunc}"), budget.seed, x
    )
    expect_ok = True

    feas = check_feasible(p, x, tol)
    report.add(CheckRecord(
        "feasibility",
        "pass" if feas.feasible else "infeasible",
        {"n_active": len(feas.info.active) if feas.info else 0},
    ))
    expect_ok &= feas.feasible

    deriv = validate_derivatives(p, x, tol)
    report.add(CheckRecord(
        "derivative_validation",
        "pass" if deriv.passed else "fail",
        {"max_gradient_error": max(r["gradient_max_error"] for r in deriv.per_function)},
    ))
    expect_ok &= deriv.passed

    growth = sample_growth(p, x, growth_alpha, growth_eps, growth_samples,
                           seed=budget.seed, tol=tol)
    report.add(CheckRecord(
        "growth_consistency",
        "pass" if growth.consistent else "violated",
        {
            "alpha": growth_alpha,
            "eps": growth_eps,
            "samples": growth.samples_accepted,
            "worst_margin": growth.worst_margin,
        },
    ))
    expect_ok &= growth.consistent

    rz = check_rzkcq(p, x, tol)
    report.add(CheckRecord("rzkcq", "holds" if rz.holds else "violated", {}))
    expect_ok &= rz.holds

    foc = foc_residual(p, x, tol)
    mset = foc.multipliers
    report.add(CheckRecord(
        "stationarity",
        "holds" if foc.stationary else "not_stationary",
        {"residual": foc.residual},
    ))
    expect_ok &= foc.stationary
    assert mset is not None

    unique = len(mset.vertices) == 1 and abs(float(mset.vertices[0][0])) <= 1e-10
    lam = mset.lam_of(mset.vertices[0]) if mset.vertices else None
    lam_ok = lam is not None and float(np.max(np.abs(lam - np.array([0.0, 0.0, 1.0])))) <= 1e-10
    report.add(CheckRecord(
        "multiplier_uniqueness",
        "pass" if unique and lam_ok else "fail",
        {
            "n_vertices": len(mset.vertices),
            "mu": [float(v[0]) for v in mset.vertices],
            "lambda": list(map(float, lam)) if lam is not None else [],
        },
    ))
    expect_ok &= unique and lam_ok

    hypo = ("rzkcq holds: multiplier set nonempty and bounded",)
    snc = check_snc(p, x, mset, budget=budget, tol=tol, hypotheses=hypo)
    report.add(CheckRecord(
        "snc_sup",
        "holds" if snc.kind == "snc_holds" else "violated",
        {"sampled_min": snc.sampled_min, "expected_value": -2.0 * DELTA},
        second_order_witness_dict(snc),
        list(snc.hypotheses),
    ))
    expect_ok &= (
        snc.kind == "snc_violated"
        and snc.witness_value is not None
        and abs(snc.witness_value - (-2.0 * DELTA)) <= 1e-9
    )

    strict = check_strict_cq(p, x, mset.multipliers(mset.vertices[0]), tol)
    report.add(CheckRecord(
        "strict_cq",
        "holds" if strict.holds else "violated",
        {"achieved_cone": strict.achieved_cone or ""},
        {"witness": list(map(float, strict.witness))} if strict.witness is not None else None,
    ))
    expect_ok &= (not strict.holds) and strict.achieved_cone == "(-inf, 0]"

    hs_ok, _rows = verify_halfspace_representation(ex.geometry)
    report.add(CheckRecord("halfspace_representation", "pass" if hs_ok else "fail",
                           {"rows_checked": len(_rows)}))
    sec_ok, worst_member, worst_diag = verify_section_membership(ex.geometry, 30, 30)
    report.add(CheckRecord(
        "section_membership",
        "pass" if sec_ok else "fail",
        {"worst_membership_residual": worst_member, "worst_diagonal_residual": worst_diag},
    ))
    expect_ok &= hs_ok and sec_ok

    report.add(CheckRecord("chain_expectations", "pass" if expect_ok else "fail", {}))
    report.wall_time_s = time.perf_counter() - start
    return ex, report
