import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from holoconf import cli
from holoconf import verify as ver
from holoconf.catalog import builtin


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_report_text_and_json(capsys):
    code, out, _ = run(capsys, "report", "--metric", "builtin:cp2_complexification", "--point", "0.1,0.2i,0,0.1")
    assert code == 0 and "Wminus" in out
    code, out, _ = run(capsys, "report", "--metric", "builtin:cp2_complexification", "--json")
    assert code == 0
    d = json.loads(out)
    assert "scalar" in d and "Wminus" in d


def test_exit_codes(capsys):
    assert run(capsys, "report", "--point", "1,2")[0] == cli.EXIT_INPUT
    assert run(capsys, "report", "--metric", "builtin:nope")[0] == cli.EXIT_INPUT
    assert run(capsys, "report", "--metric", "/no/such/file.json")[0] == cli.EXIT_INPUT
    assert run(capsys, "report", "--metric", "builtin:cp2_complexification",
               "--point", "1,0,-1,0")[0] == cli.EXIT_NUMERIC
    assert run(capsys, "verify", "--metric", "builtin:generic4", "--suite", "selfdual",
               "--points", "2")[0] == cli.EXIT_FAIL
    assert run(capsys, "verify", "--metric", "builtin:flat4", "--suite", "core",
               "--points", "2")[0] == cli.EXIT_OK


def test_bad_orientation_is_usage_error():
    with pytest.raises(SystemExit):
        cli.main(["report", "--orientation", "2"])


def test_manifest_file(capsys, tmp_path):
    d = builtin("round4").to_dict()
    path = tmp_path / "m.json"
    path.write_text(json.dumps(d))
    assert run(capsys, "report", "--metric", str(path))[0] == 0
    d["components"][0]["expr"] = "1 + "
    path.write_text(json.dumps(d))
    code, _, err = run(capsys, "report", "--metric", str(path))
    assert code == cli.EXIT_INPUT and "input error" in err


def test_parse_vector():
    assert np.allclose(cli.parse_vector("1, 2i, -0.5+1j, 3", 4), [1, 2j, -0.5 + 1j, 3])
    with pytest.raises(cli.InputError):
        cli.parse_vector("1,2", 4)
    with pytest.raises(cli.InputError):
        cli.parse_vector("1,x,0,0", 4)


def test_trace_csv(capsys, tmp_path):
    path = tmp_path / "g.csv"
    code, _, _ = run(capsys, "trace", "--velocity", "1,i,0,0", "--t-end", "0.5", "--steps", "16",
                     "--csv", str(path))
    assert code == 0
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert len(rows) == 18
    assert run(capsys, "trace", "--velocity", "1,0,0,0")[0] == cli.EXIT_INPUT


def test_classify_plane(capsys):
    code, out, _ = run(capsys, "classify-plane", "--u", "1,i,0,0", "--w", "0,0,1,i")
    assert code == 0 and json.loads(out)["label"] == "alpha"
    code, out, _ = run(capsys, "classify-plane", "--u", "1,i,0,0", "--w", "0,0,1,i", "--orientation", "-1")
    assert json.loads(out)["label"] == "beta"


def test_check_beta_surface(capsys):
    code, out, _ = run(capsys, "check-beta-surface", "--metric", "builtin:cp2_complexification", "--points", "2")
    assert code == 0
    assert json.loads(out)["pass"] is True


def test_hypersurface_commands(capsys):
    code, out, _ = run(capsys, "check-umbilic", "--hypersurface", "builtin:unit_sphere", "--point", "0.1,0.2,0.1")
    assert code == 0 and json.loads(out)["umbilic"] is True
    code, out, _ = run(capsys, "check-theorem8", "--metric", "builtin:conf_flat4_slab", "--point", "0.1,0.2,0.1")
    d = json.loads(out)
    assert code == 0 and d["witness"] == "unverified — no desk-scale witness metric"
    code, out, _ = run(capsys, "check-theorem8", "--metric", "builtin:generic4", "--point", "0.1,0.2,0.1")
    assert code == cli.EXIT_FAIL


def test_verify_flat4_all_tiny():
    s = ver.run(builtin("flat4"), points=2, seed=3)
    assert s.passed
    for c in s.checks:
        if c.status == "pass" and not c.id.startswith("core.fd_oracle"):
            assert c.max_residual <= 1e-10, c.id


def test_verify_generic4_fails_only_self_duality():
    s = ver.run(builtin("generic4"), points=2, seed=1)
    failed = {c.id for c in s.checks if c.status == "fail"}
    assert failed == {"selfdual.wminus_ratio"}


def test_verify_json_deterministic(capsys):
    a = ver.run(builtin("round4"), suite="core", points=2, seed=5).to_json()
    b = ver.run(builtin("round4"), suite="core", points=2, seed=5).to_json()
    assert a == b
    assert ver.run(builtin("round4"), suite="core", points=2, seed=6).to_json() != a


def test_verify_thread_count_does_not_change_output():
    cmd = [sys.executable, "-m", "holoconf.cli", "verify", "--metric", "builtin:round4", "--suite", "core",
           "--points", "3", "--seed", "2", "--json"]
    outs = []
    for threads in ("1", "4"):
        env = dict(os.environ, HOLOCONF_THREADS=threads)
        outs.append(subprocess.run(cmd, capture_output=True, env=env, check=True).stdout)
    assert outs[0] == outs[1]


def test_verify_tol_override(capsys):
    code, _, _ = run(capsys, "verify", "--metric", "builtin:generic4", "--suite", "selfdual",
                     "--points", "2", "--tol", "10")
    assert code == 0
