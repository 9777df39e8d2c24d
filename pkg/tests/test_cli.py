import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from exchsym.cli import SCHEMAS, SUITES, main, run_check, validate


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def test_canon_example(tmp_path, capsys):
    path = write(tmp_path, "a.json", [[1, 0], [0, 0]])
    code, out = run(["canon", path, "--group", "separate"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["canon"] == [[0, 0], [0, 1]]
    assert doc["witness"] == [[1, 0], [1, 0]]
    assert doc["orbit_size"] == 4
    validate(doc, "canon_result")


def test_canon_constant_identity(tmp_path, capsys):
    path = write(tmp_path, "a.json", {"schema_version": "1", "array": [[2, 2], [2, 2]],
                                      "group": {"kind": "joint", "sizes": [2, 2]}})
    code, out = run(["canon", path], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["canon"] == [[2, 2], [2, 2]] and doc["witness"] == [[0, 1]]


def test_canon_joint_9x9_is_infeasible(tmp_path, capsys):
    path = write(tmp_path, "a.json", np.zeros((9, 9)).tolist())
    code, _ = run(["canon", path, "--group", "joint"], capsys)
    assert code == 3


@pytest.mark.parametrize("content,extra", [
    ("not json", []),
    ('{"schema_version": "1", "array": [[1]], "bogus": 1}', []),
    ('[[1, 2], [3]]', ["--group", "separate"]),
    ('[[1, 2], [3, 4]]', []),
    ('[[1, 2], [3, 4]]', ["--group", "joint"]),
    ('[[1, 2, 3], [3, 4, 5]]', ["--group", "joint"]),
])
def test_canon_input_errors(tmp_path, capsys, content, extra):
    path = write(tmp_path, "a.json", content)
    code, _ = run(["canon", path] + extra, capsys)
    assert code == 2


def test_sample_needs_seed_and_is_deterministic(tmp_path, capsys):
    path = write(tmp_path, "a.json", [1, 1, 2])
    assert run(["sample", path, "--group", "seq"], capsys)[0] == 2
    a = run(["sample", path, "--group", "seq", "--seed", "5", "--count", "50"], capsys)[1]
    b = run(["sample", path, "--group", "seq", "--seed", "5", "--count", "50"], capsys)[1]
    assert a == b
    samples = json.loads(a)["samples"]
    assert {tuple(s) for s in samples} == {(1, 1, 2), (1, 2, 1), (2, 1, 1)}


def test_check_set_invariance_suite(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {"schema_version": "1", "seed": 11, "suites": ["set_invariance"]})
    out = str(tmp_path / "r.json")
    code, _ = run(["check", cfg, "--out", out], capsys)
    doc = json.loads(open(out).read())
    assert code == 0 and doc["passed"]
    names = {r["name"] for r in doc["reports"]}
    assert any("cond_indep" in n for n in names) and any("exhaustive" in n for n in names)
    assert all("max_deviation" in r for r in doc["reports"])
    validate(doc, "check_report")


def test_check_negative_control_exits_1(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {"schema_version": "1", "seed": 1, "suites": ["negative_control"]})
    code, out = run(["check", cfg], capsys)
    assert code == 1
    assert not any(r["passed"] for r in json.loads(out)["reports"])


def test_check_empty_suite_list(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {"schema_version": "1", "seed": 1, "suites": []})
    code, out = run(["check", cfg], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["reports"] == [] and doc["warnings"]


@pytest.mark.parametrize("cfg", [
    {"schema_version": "1", "suites": ["matrix"]},
    {"schema_version": "1", "seed": 1, "suites": ["no_such_suite"]},
    {"schema_version": "2", "seed": 1, "suites": []},
    {"schema_version": "1", "seed": 1, "suites": [], "extra": True},
    {"schema_version": "1", "seed": 1.5, "suites": []},
])
def test_check_config_errors(tmp_path, capsys, cfg):
    assert run(["check", write(tmp_path, "c.json", cfg)], capsys)[0] == 2


def test_check_seed_flag_overrides(tmp_path):
    doc = run_check({"schema_version": "1", "seed": 1, "suites": ["tau"]}, seed=9, tol=0.0, bitexact=True)
    assert doc["seed"] == 9 and doc["bitexact"] and doc["passed"]


def test_check_is_deterministic():
    cfg = {"schema_version": "1", "seed": 3, "suites": ["matrix", "ustat"]}
    assert json.dumps(run_check(cfg)) == json.dumps(run_check(cfg))


def test_train_mean_and_model_file(tmp_path, capsys):
    model = str(tmp_path / "m.json")
    cfg = write(tmp_path, "t.json", {"schema_version": "1", "seed": 2, "task": "mean", "epochs": 4,
                                     "n_train": 3000, "n_test": 500, "model_path": model})
    code, out = run(["train", cfg], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["test_mse"] < 1e-3
    assert doc["invariance_audit"]["passed"]
    assert len(doc["loss_trace"]) == 5
    assert "layers" in json.loads(open(model).read())


def test_train_zero_epochs(tmp_path, capsys):
    cfg = {"schema_version": "1", "seed": 2, "task": "sum", "epochs": 0, "n_train": 200, "n_test": 50}
    code, out = run(["train", write(tmp_path, "t.json", cfg)], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["loss_trace"]) == 1
    assert doc["loss_trace"][0] == doc["train_mse"]


def test_train_matrix(tmp_path, capsys):
    cfg = {"schema_version": "1", "seed": 2, "task": "matrix", "epochs": 100, "n_train": 1000, "n_test": 200}
    code, out = run(["train", write(tmp_path, "t.json", cfg)], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["test_mse"] < 1e-3
    assert doc["invariance_audit"]["passed"]


def test_train_divergence_exit_code(tmp_path, capsys):
    cfg = {"schema_version": "1", "seed": 2, "task": "matrix", "epochs": 20, "n_train": 200, "lr": 10.0}
    with np.errstate(all="ignore"):
        code, _ = run(["train", write(tmp_path, "t.json", cfg)], capsys)
    assert code == 1


def test_report_aggregates(tmp_path, capsys):
    good = run_check({"schema_version": "1", "seed": 1, "suites": ["tau"]})
    bad = run_check({"schema_version": "1", "seed": 1, "suites": ["negative_control"]})
    a, b = write(tmp_path, "a.json", good), write(tmp_path, "b.json", bad)
    code, out = run(["report", a], capsys)
    assert code == 0 and json.loads(out)["passed"]
    code, out = run(["report", a, b], capsys)
    assert code == 1 and json.loads(out)["failed"]
    assert run(["report", write(tmp_path, "c.json", {"x": 1})], capsys)[0] == 2


def test_unknown_subcommand():
    assert main(["bogus"]) == 2


def test_console_entry_point(tmp_path):
    path = write(tmp_path, "a.json", [3, 1, 2])
    res = subprocess.run([sys.executable, "-m", "exchsym.cli", "canon", path, "--group", "seq"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["canon"] == [1, 2, 3]


def test_floats_roundtrip_exactly(tmp_path, capsys):
    x = [[0.1 + 0.2, 1 / 3], [2 ** -40, 1e300]]
    path = write(tmp_path, "a.json", x)
    _, out = run(["canon", path, "--group", "separate"], capsys)
    flat = sorted(v for row in json.loads(out)["canon"] for v in row)
    assert flat == sorted(v for row in x for v in row)


def test_schemas_reject_unknown_keys():
    for name, schema in SCHEMAS.items():
        assert schema["additionalProperties"] is False, name


# --- fuzzing: every emitted document re-parses under its schema -------------------------------------

values = st.sampled_from([0.0, 1.0, 2.0, -1.5, 0.1, 1e-9])


@st.composite
def requests(draw):
    group = draw(st.sampled_from(["seq", "separate", "joint", "directed"]))
    if group == "seq":
        shape = (draw(st.integers(1, 5)),)
    elif group == "separate":
        shape = tuple(draw(st.lists(st.integers(1, 3), min_size=2, max_size=3)))
    else:
        n = draw(st.integers(1, 4))
        shape = (n, n)
    x = np.array(draw(st.lists(values, min_size=int(np.prod(shape)), max_size=int(np.prod(shape)))))
    x = x.reshape(shape)
    if group == "joint":
        x = np.triu(x) + np.triu(x, 1).T
    command = draw(st.sampled_from(["canon", "sample"]))
    seed = draw(st.integers(0, 2 ** 32))
    wrapped = draw(st.booleans())
    return command, group, x, seed, wrapped


@settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(req=requests())
def test_fuzz_roundtrip(tmp_path, capsys, req):
    command, group, x, seed, wrapped = req
    kind = "joint" if group == "directed" else group
    if wrapped:
        spec = {"kind": kind, "sizes": list(x.shape)}
        if kind == "joint":
            spec["symmetric"] = group == "joint"
        doc = {"schema_version": "1", "array": x.tolist(), "group": spec}
        argv = [command, write(tmp_path, "in.json", doc)]
    else:
        argv = [command, write(tmp_path, "in.json", x.tolist()), "--group", kind]
        if group == "directed":
            argv.append("--directed")
    if command == "sample":
        argv += ["--seed", str(seed), "--count", "3"]
    code, out = run(argv, capsys)
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMAS[f"{command}_result"])
    assert json.loads(json.dumps(doc)) == doc
    if command == "canon":
        assert sorted(np.ravel(doc["canon"])) == sorted(x.ravel())


check_configs = st.fixed_dictionaries(
    {"schema_version": st.just("1"), "seed": st.integers(0, 2 ** 63),
     "suites": st.lists(st.sampled_from(sorted(SUITES)), max_size=4)},
    optional={"tolerance": st.floats(0, 1), "bitexact": st.booleans()})


@settings(max_examples=300, deadline=None)
@given(cfg=check_configs, junk=st.dictionaries(st.text(min_size=1, max_size=5), st.integers(), max_size=2))
def test_fuzz_check_config_validation(cfg, junk):
    validate(cfg, "check_config")
    assert json.loads(json.dumps(cfg)) == cfg
    extra = {k: v for k, v in junk.items() if k not in SCHEMAS["check_config"]["properties"]}
    if extra:
        with pytest.raises(ValueError):
            validate({**cfg, **extra}, "check_config")
