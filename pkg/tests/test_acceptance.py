"""The ten acceptance criteria, one test each.

Each test records a PASS/FAIL line that is printed in the terminal summary
(and directly when the file is run as a script).
"""

import time

import numpy as np
import pytest

import cases
from conftest import ACCEPTANCE
from releq.cli import genericity_experiment
from releq.commuting import (
    classify_pair,
    commuting_rank_consistency,
    local_model_check,
    stratified_samples,
    stratum_info,
    stratum_tangent,
)
from releq.lie import build_algebra
from releq.solver import SolveOptions, continue_branch, group_classes, manifold_dim, multistart, solve_re
from releq.systems import rigid_body, rigid_body_rotors
from releq.transversality import (
    check_transversal_direct,
    check_transversal_normalform,
    necessary_inequality,
    normal_form_blocks,
    quotient_branch_dim,
    secant_angle,
    singularity_model,
    symplecticity_check,
    tangent_space_E,
)

ALGEBRAS = ["so(3)", "su(3)", "so(4)", "so(3)+torus(3)"]
N_SAMPLES = 1000


def record(n, ok, detail):
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def samples():
    t0 = time.perf_counter()
    out = {name: stratified_samples(build_algebra(name), N_SAMPLES, seed=7) for name in ALGEBRAS}
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def suite():
    return cases.suite()


def test_criterion_01_dimension_formula(samples):
    pairs, t_sample = samples
    t0 = time.perf_counter()
    bad, counts = 0, []
    for name, ps in pairs.items():
        g = ps[0].algebra
        counts.append(len(ps))
        for pair in ps:
            fp = classify_pair(pair)
            bad += stratum_tangent(pair).dim != g.dim + 2 * fp.dim_z - fp.dim_k
    elapsed = t_sample + time.perf_counter() - t0
    record(1, bad == 0 and min(counts) >= N_SAMPLES and elapsed < 60,
           f"{sum(counts)} pairs over {len(counts)} algebras, {bad} violations, {elapsed:.1f}s")


def test_criterion_02_isotropy_rank(samples):
    pairs, _ = samples
    bad = 0
    for ps in pairs.values():
        g = ps[0].algebra
        for pair in ps:
            fp = classify_pair(pair)
            bad += fp.rank_k != g.rank or not commuting_rank_consistency(g, fp)
    record(2, bad == 0, f"{sum(map(len, pairs.values()))} pairs, {bad} violations")


def test_criterion_03_local_model():
    bases, bad, worst = 0, 0, 0.0
    for name in ALGEBRAS:
        for pair in stratified_samples(build_algebra(name), 6, seed=11):
            rep = local_model_check(pair, 500, seed=bases, tol=1e-9)
            bases += 1
            bad += rep.n - rep.n_agree
            worst = max(worst, rep.max_residual)
    record(3, bases >= 20 and bad == 0,
           f"{bases} base pairs x 500 perturbations, {bad} disagreements, max defect gap {worst:.1e}")


def test_criterion_04_rigid_body_axes():
    body = rigid_body((1.0, 2.0, 3.0))
    found, failures = multistart(body, 100, seed=1)
    classes = group_classes(found)
    ok = len(classes) == 3
    axes = set()
    for members in classes.values():
        re = members[0]
        d = re.point.mu_b / np.linalg.norm(re.point.mu_b)
        i = int(np.argmax(np.abs(d)))
        axes.add(i)
        ok &= abs(abs(d[i]) - 1.0) < 1e-6 and np.linalg.norm(np.delete(d, i)) < 1e-6
        ok &= re.fingerprint.as_tuple() == (1, 1, 1, 0)
        ok &= check_transversal_direct(body, re).transversal
        ok &= check_transversal_normalform(normal_form_blocks(body, re), re.fingerprint).transversal
        ok &= tangent_space_E(body, re).dim == 4 and manifold_dim(body, re) == 4
        ok &= quotient_branch_dim(body, re) == 1 == stratum_info(body.algebra, re.fingerprint).dim_quotient
    ok &= axes == {0, 1, 2}
    record(4, ok, f"{len(classes)} classes on axes {sorted(axes)}, {failures} failed starts")


def test_criterion_05_zero_momentum_body():
    body = rigid_body((1.0, 2.0, 3.0))
    re = solve_re(body, body.point(np.zeros(3)), np.zeros(3))
    v = check_transversal_direct(body, re)
    ok = (re.fingerprint.as_tuple() == (3, 0, 1, 3) and not necessary_inequality(re.fingerprint)
          and not v.transversal and np.isfinite(v.margin))
    record(5, ok, f"fingerprint {re.fingerprint.as_tuple()}, direct transversal {v.transversal}, margin {v.margin:.3g}")


def test_criterion_06_rotor_origin():
    rotors = rigid_body_rotors()
    re = solve_re(rotors, rotors.point(np.zeros(6)), np.zeros(6))
    info = stratum_info(rotors.algebra, re.fingerprint)
    sing = singularity_model(re.fingerprint)
    direct = check_transversal_direct(rotors, re)
    nf = check_transversal_normalform(normal_form_blocks(rotors, re), re.fingerprint)
    ok = (re.fingerprint.as_tuple() == (6, 3, 4, 3) and info.dim_quotient == 0
          and sing.descriptor == "commuting pairs of so(3), local cone dimension 4" and sing.cone_dim == 4
          and direct.transversal == nf.transversal)
    record(6, ok, f"fingerprint {re.fingerprint.as_tuple()}, quotient {info.dim_quotient}, '{sing.descriptor}', "
                  f"direct {direct.transversal} / normal form {nf.transversal}")


def test_criterion_07_normal_form(suite):
    worst = 0.0
    c_norm = 0.0
    for sys, re in suite:
        res = normal_form_blocks(sys, re).residuals
        worst = max(worst, *(res[k] for k in ("forbidden", "C_intertwining", "Cstar_intertwining", "D_commuting", "D_symmetry")))
        if sys.name == "rigid_body" and np.linalg.norm(re.momentum) > 0:
            c_norm = max(c_norm, res["C_norm"])
    record(7, worst < 1e-8 and c_norm < 1e-8,
           f"{len(suite)} suite RE, max block residual {worst:.1e}, rigid-body |C| {c_norm:.1e}")


def _secants(sys, re, T, h):
    opts = SolveOptions(recenter=False)
    p0 = re.point
    cols = []
    for j in range(T.dim):
        for s in (h, -h):
            guess = p0.with_coords(p0.coords + s * T.basis[:, j])
            sol = solve_re(sys, guess, re.generator, opts)
            cols.append((sol.point.coords - p0.coords) / s)
    return np.array(cols).T


def test_criterion_08_tangent_space():
    body = rigid_body((1.0, 2.0, 3.0))
    worst, dims = 0.0, []
    for re in cases.axis_res(body):
        T = tangent_space_E(body, re)
        dims.append(T.dim)
        sec = _secants(body, re, T, 1e-5)
        branch = continue_branch(body, re, np.concatenate([np.zeros(3), re.point.mu_b]), steps=1, step_size=1e-4)
        cont = np.array(branch.secants).T
        worst = max(worst, secant_angle(T, np.hstack([sec, cont / np.linalg.norm(cont, axis=0)])))
    record(8, worst < 1e-3 and dims == [4, 4, 4], f"dims {dims}, largest principal angle {worst:.1e} rad")


def test_criterion_09_symplecticity(suite):
    n, bad = 0, 0
    for sys, re in suite:
        if not check_transversal_direct(sys, re).transversal:
            continue
        rec = symplecticity_check(sys, re)
        n += 1
        bad += not rec.agree
    record(9, n > 0 and bad == 0, f"{n} transversal suite RE, {bad} disagreements")


def test_criterion_10_genericity():
    t0 = time.perf_counter()
    s = genericity_experiment(rigid_body((1.0, 2.0, 3.0)), 0.05, 100, seed=2024)
    elapsed = time.perf_counter() - t0
    record(10, len(s.fractions) + s.skipped == 100 and s.aggregate == 1.0 and elapsed < 300,
           f"{len(s.fractions)} trials ({s.skipped} skipped), {sum(s.n_re)} RE, "
           f"aggregate fraction {s.aggregate:.6g}, {elapsed:.1f}s")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
