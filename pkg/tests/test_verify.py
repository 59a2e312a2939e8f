import json

import numpy as np

from isomono.connection import DeformationVector
from isomono.verify import (CheckResult, check_zero_curvature, run_suite, sample_configuration, sample_lambdas,
                            sample_structure)


def test_small_suite_passes_and_is_deterministic():
    a = run_suite(seed=11, cases=4)
    assert a.passed, a.failures()
    b = run_suite(seed=11, cases=4, workers=2)
    assert a.to_json() == b.to_json()
    doc = json.loads(a.to_json())
    assert doc["schema"] == 1 and doc["summary"]["configs"] == 4 and doc["summary"]["failed"] == 0


def test_impossible_tolerance_reports_failures():
    rep = run_suite(seed=1, cases=4, checks=("hamiltonianity", "zero_curvature", "time_chart"), tol=1e-15)
    assert not rep.passed
    assert all(c.error is None for c in rep.configs)
    assert rep.failures() and all(f[1] != "error" for f in rep.failures())


def test_hierarchy_slice():
    rep = run_suite(seed=2, structures=[(4, ()), (5, ()), (6, ())])
    assert rep.passed, rep.failures()
    assert [c.g for c in rep.configs] == [1, 2, 3]


def test_zero_vector_has_no_curvature():
    rng = np.random.default_rng(5)
    cfg, state, _ = sample_configuration(rng, sample_structure(rng, "rinf=2", 4))
    lam = sample_lambdas(rng, cfg, state, 4)
    for r in check_zero_curvature(cfg, state, DeformationVector.zero(cfg.structure), lam):
        assert r.residual == 0 or r.residual < 1e-14


def test_check_result_serialisation():
    bad = CheckResult("x", float("nan"), 1e-6)
    assert not bad.passed and bad.to_dict()["residual"] is None
    good = CheckResult("y", 1e-9, 1e-6)
    assert good.passed and good.to_dict()["passed"] is True


def test_errors_are_captured():
    from isomono.connection import PoleStructure
    rep = run_suite(seed=0, structures=[PoleStructure(3, (), ())], checks=("det_V",))
    assert not rep.passed and rep.failures()[0][1] == "error"
