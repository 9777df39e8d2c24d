"""Acceptance criteria at full scale.

Run with pytest (one PASS/FAIL line per criterion is printed even under
capture) or directly: ``python tests/test_acceptance.py``.
"""

import itertools
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from exchsym.cli import run_train
from exchsym.groups import GroupSpec
from exchsym.invariants import empirical_measure
from exchsym.numkit import NoiseSource, grad_check, mlp_init, noise_grid
from exchsym.suites import SUITES, suite_set_equivariance
from exchsym.symtest import cond_indep_test, iid_law, sufficiency_test

SEED = 20261016
ALPHA = 0.001


def _all_pass(reports):
    return all(r.passed for r in reports), "; ".join(
        f"{r.name}: passed={r.passed} dev={r.max_deviation:.3g} cases={r.cases_checked}" for r in reports)


def crit_maximal_invariants():
    start = time.perf_counter()
    reports = SUITES["maximal_invariants"](SEED)
    elapsed = time.perf_counter() - start
    ok, info = _all_pass(reports)
    return ok and elapsed < 30.0, f"{elapsed:.1f}s; {info}"


def crit_disintegration():
    r = sufficiency_test(iid_law({0: 0.3, 1: 0.7}), empirical_measure, GroupSpec.seq(3), [0, 1], 1e-12,
                         name="bernoulli_0.7")
    return r.passed and r.max_deviation <= 1e-12, f"max deviation {r.max_deviation:.3g}"


def crit_orbit_sampler():
    r = SUITES["orbit_law"](SEED, N=10 ** 5, alpha=ALPHA)[-1]
    return r.passed, f"chi2={r.statistic:.3f} p={r.p_value:.3g}"


def crit_layer_equivariance():
    sweeps = [lambda s, tol, bx: suite_set_equivariance(s, tol, bx, draws=100, n=4),
              lambda s, tol, bx: SUITES["matrix"](s, tol, bx, draws=100, shapes=((3, 3), (3, 4)), joint_sizes=()),
              lambda s, tol, bx: SUITES["vertex_edge"](s, tol, bx, draws=100, n=4),
              lambda s, tol, bx: SUITES["darray"](s, tol, bx, draws=100, shape=(2, 2, 2)),
              lambda s, tol, bx: SUITES["bipartite"](s, tol, bx, draws=100)]
    float_reports = [r for sw in sweeps for r in sw(SEED, 1e-9, False)]
    exact_reports = [r for sw in sweeps for r in sw(SEED, 0.0, True)]
    ok1, _ = _all_pass(float_reports)
    ok2, _ = _all_pass(exact_reports)
    worst = max(r.max_deviation for r in float_reports)
    worst_exact = max(r.max_deviation for r in exact_reports)
    return ok1 and ok2 and worst_exact == 0.0, f"float worst {worst:.3g}, bitexact worst {worst_exact:.3g}"


def crit_stack_invariance():
    return _all_pass(SUITES["stack"](SEED, 1e-9, False, n=4, N=10 ** 5, alpha=ALPHA))


def _exact_effect(prob_y1):
    """Largest gap between P(Y=1 | X=x) and P(Y=1 | M(X)) over binary x, n = 3, P(X_i = 1) = 0.3."""
    fibres = {}
    for x in itertools.product((0, 1), repeat=3):
        w = Fraction(1)
        for v in x:
            w *= Fraction(3, 10) if v else Fraction(7, 10)
        fibres.setdefault(empirical_measure(x), []).append((w, prob_y1(x)))
    gap = Fraction(0)
    for members in fibres.values():
        total = sum(w for w, _ in members)
        pooled = sum(w * p for w, p in members) / total
        gap = max(gap, max(abs(p - pooled) for _, p in members))
    return gap


def crit_cond_indep():
    n_samples = 10 ** 5
    src = NoiseSource(SEED)
    x = (noise_grid(src.fork(0), (n_samples,), 3) < 0.3).astype(np.float64)
    eta = noise_grid(src.fork(1), (n_samples,), 1)[:, 0]
    good_effect = _exact_effect(lambda v: Fraction(1, 5) * (1 + sum(v)))
    bad_effect = _exact_effect(lambda v: Fraction(v[0]))
    good = cond_indep_test(x, (eta < 0.2 + 0.2 * x.sum(axis=1)).astype(float), empirical_measure, ALPHA)
    bad = cond_indep_test(x, x[:, 0], empirical_measure, ALPHA)
    ok = good.passed and not bad.passed and good_effect == 0 and bad_effect == Fraction(2, 3)
    return ok, (f"Y=f(eta,M): effect {good_effect} p={good.p_value:.3g}; "
                f"Y=X1: effect {bad_effect} p={bad.p_value:.3g}")


def crit_tau():
    reports = SUITES["tau"](SEED, 0.0, False, draws=1000, n=4)
    r = reports[0]
    return r.passed and r.max_deviation == 0.0 and not r.warnings, f"{r.cases_checked} cases, dev {r.max_deviation}"


def crit_grad_check():
    root = NoiseSource(SEED)
    worst, failures = 0.0, 0
    acts = ("tanh", "relu", "identity")
    for t in range(100):
        src = root.fork(t)
        u = noise_grid(src.fork(0), (), 8)
        depth = 1 + int(u[0] * 3)
        sizes = [1 + int(v * 5) for v in u[1:depth + 2]]
        p = mlp_init(sizes, src.fork(1), acts[int(u[6] * 3)], acts[int(u[7] * 3)])
        p = p.with_flat(p.flat() + 0.3 * (noise_grid(src.fork(2), (), p.flat().size) - 0.5))
        batch = 1 + t % 4
        x = noise_grid(src.fork(3), (batch,), sizes[0]) * 2 - 1
        upstream = noise_grid(src.fork(4), (batch,), sizes[-1]) - 0.5
        rep = grad_check(p, x, tol=1e-5, upstream=upstream)
        worst = max(worst, rep.max_rel_error)
        failures += not rep.passed
    return failures == 0, f"worst relative error {worst:.3g}, failures {failures}"


def crit_ustat():
    return _all_pass(SUITES["ustat"](SEED, 0.0, False, max_n=12))


def crit_training():
    cfg = {"schema_version": "1", "seed": SEED, "task": "mean", "set_size": 5, "n_train": 10 ** 4,
           "pooling": "sum"}
    start = time.perf_counter()
    m = run_train(cfg)
    elapsed = time.perf_counter() - start
    ok = m["test_mse"] < 1e-3 and elapsed < 60.0 and m["invariance_audit"]["passed"]
    return ok, f"test MSE {m['test_mse']:.3g} in {elapsed:.1f}s, audit passed={m['invariance_audit']['passed']}"


def crit_canon_pruning():
    return _all_pass(SUITES["canon_pruning"](SEED, random_count=1000))


CRITERIA = [
    ("maximal invariants", crit_maximal_invariants),
    ("disintegration exactness", crit_disintegration),
    ("orbit-law sampler calibration", crit_orbit_sampler),
    ("layer equivariance sweeps", crit_layer_equivariance),
    ("invariance of composed stack", crit_stack_invariance),
    ("conditional independence", crit_cond_indep),
    ("tau construction", crit_tau),
    ("gradient correctness", crit_grad_check),
    ("U-statistic pooling", crit_ustat),
    ("toy training", crit_training),
    ("pruned canonization", crit_canon_pruning),
]


def run_criterion(k, out=None):
    label, fn = CRITERIA[k]
    ok, info = fn()
    print(f"{'PASS' if ok else 'FAIL'} {k + 1:2d} {label}: {info}", file=out or sys.stdout, flush=True)
    return ok


@pytest.mark.slow
@pytest.mark.parametrize("k", range(len(CRITERIA)), ids=[c[0].replace(" ", "_") for c in CRITERIA])
def test_criterion(k, capsys):
    with capsys.disabled():
        print()
        ok = run_criterion(k)
    assert ok


if __name__ == "__main__":
    results = [run_criterion(k) for k in range(len(CRITERIA))]
    sys.exit(0 if all(results) else 1)
