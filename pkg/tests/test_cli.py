import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from noiseless import catalog, cli
from noiseless.analysis import AnalysisConfig, blocks_text, run_analysis
from noiseless.channel import save_channel


@pytest.fixture(scope="module")
def report_schema():
    return json.loads(resources.files("noiseless").joinpath("schemas/report.schema.json").read_text())


@pytest.fixture(scope="module")
def channel_schema():
    return json.loads(resources.files("noiseless").joinpath("schemas/channel.schema.json").read_text())


def run_cli(*args, capsys=None):
    code = cli.main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_blocks_text():
    assert blocks_text([(2, 2), (1, 1)]) == "1_2 ⊗ M_2 ⊕ 1_1 ⊗ M_1"


def test_example_writes_valid_channel(tmp_path, capsys, channel_schema):
    out = tmp_path / "kl97.json"
    code, _, _ = run_cli("example", "kl97", "--q", "0.3", "--out", str(out), capsys=capsys)
    assert code == 0
    data = json.loads(out.read_text())
    jsonschema.validate(data, channel_schema)
    assert data["dim"] == 4 and len(data["kraus"]) == 3


def test_example_stdout_and_params(capsys):
    code, out, _ = run_cli("example", "identity", "--dim", "3", capsys=capsys)
    assert code == 0 and json.loads(out)["dim"] == 3
    code, out, _ = run_cli("example", "random-unitary-mix", "--param", "blocks=2x2,1x2", "--dim", "6", capsys=capsys)
    assert code == 0 and json.loads(out)["dim"] == 6


def test_validate_ok(tmp_path, capsys):
    path = tmp_path / "z.json"
    save_channel(catalog.z_dephasing(), path)
    code, out, _ = run_cli("validate", str(path), "--format", "json", capsys=capsys)
    assert code == 0
    info = json.loads(out)
    assert info["valid"] and info["unital"] and info["num_kraus"] == 2


def test_validate_errors(tmp_path, capsys):
    ntp = tmp_path / "ntp.json"
    ntp.write_text(json.dumps({"dim": 2, "kraus": [[[[0.7071, 0], [0, 0]], [[0, 0], [0.7071, 0]]]]}))
    code, _, err = run_cli("validate", str(ntp), capsys=capsys)
    assert code == 1 and "NotTracePreserving" in err or "trace preserving" in err
    trunc = tmp_path / "trunc.json"
    trunc.write_text('{"dim": 2, "kraus": [')
    code, _, err = run_cli("validate", str(trunc), capsys=capsys)
    assert code == 1 and "byte offset" in err
    code, _, err = run_cli("validate", str(tmp_path / "missing.json"), capsys=capsys)
    assert code == 1


def test_analyze_input_errors(capsys, tmp_path):
    assert run_cli("analyze", capsys=capsys)[0] == 1
    assert run_cli("analyze", "--example", "kl97", "--q", "0.9", capsys=capsys)[0] == 1
    assert run_cli("analyze", "--example", "kl97", "--param", "bogus", capsys=capsys)[0] == 1
    assert run_cli("analyze", "--example", "z-dephasing", "--param", "q=1", capsys=capsys)[0] == 1
    path = tmp_path / "z.json"
    save_channel(catalog.z_dephasing(), path)
    assert run_cli("analyze", str(path), "--example", "kl97", capsys=capsys)[0] == 1
    assert run_cli("analyze", str(path), "--q", "0.2", capsys=capsys)[0] == 1
    with pytest.raises(SystemExit):
        cli.main(["analyze", "--example", "kl97", "--strategies", "magic"])
    with pytest.raises(SystemExit):
        cli.main(["analyze", "--example", "nope"])


def test_analyze_text(capsys):
    code, out, _ = run_cli("analyze", "--example", "z-dephasing", "--no-timestamp", capsys=capsys)
    assert code == 0
    assert "1_1 ⊗ M_1 ⊕ 1_1 ⊗ M_1 ⊕ 1_1 ⊗ M_1 ⊕ 1_1 ⊗ M_1" in out
    assert "no non-trivial noiseless subsystems" in out


def test_analyze_json_schema_and_determinism(tmp_path, capsys, report_schema):
    path = tmp_path / "kl97.json"
    save_channel(catalog.kl97(0.3), path)
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        code, _, _ = run_cli(
            "analyze", str(path), "--format", "json", "--no-timestamp", "--seed", "5", "--output", str(out), capsys=capsys
        )
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    data = json.loads(outs[0])
    jsonschema.validate(data, report_schema)
    assert data["generated_at"] is None
    assert data["config"]["seed"] == 5


@pytest.mark.parametrize("name", sorted(catalog.EXAMPLES))
def test_every_example_report_validates(name, report_schema):
    r = run_analysis(catalog.builtin_example(name), AnalysisConfig(timestamp=False, trials=10))
    assert r.sound
    jsonschema.validate(json.loads(r.to_json()), report_schema)
    for s in r.subsystems:
        assert s["n"] > 1 and s["verification"]["eq10_residual"] < 1e-8


def test_timestamp_present_by_default(report_schema):
    r = run_analysis(catalog.identity(2), AnalysisConfig(trials=2))
    assert isinstance(r.data["generated_at"], str)
    jsonschema.validate(r.data, report_schema)


def test_report_kl97_contents():
    r = run_analysis(catalog.kl97(0.3), AnalysisConfig(timestamp=False))
    d = r.data
    assert d["search"]["accepted"] >= 2
    assert d["candidates"][0]["rank"] == 4 and d["candidates"][0]["blocks"] == [[2, 2]]
    shapes = sorted((x["m"], x["n"]) for x in r.distinct)
    assert shapes == [(1, 2), (2, 2)]
    assert d["theorem_checks"]["theorem1"]["passed"]
    assert d["theorem_checks"]["corollary"]["status"] == "skipped"


def test_report_u_dfs_contents():
    r = run_analysis(catalog.u_dfs(), AnalysisConfig(timestamp=False))
    assert [(x["m"], x["n"]) for x in r.distinct] == [(1, 2)]
    assert r.data["theorem_checks"]["corollary"]["status"] == "pass"


def test_soundness_exit_code(monkeypatch, capsys):
    import noiseless.nsfinder as nsf

    bad = nsf.NSVerification(100, 0.0, 0.0, 1.0, False)
    monkeypatch.setattr(nsf, "verify_ns", lambda *a, **k: bad)
    code, out, err = run_cli("analyze", "--example", "kl97", "--format", "json", "--no-timestamp", capsys=capsys)
    assert code == 2
    assert "soundness failure" in err
    data = json.loads(out)
    assert not data["soundness"]["passed"]
    # the candidate is kept, with its error recorded
    assert any(c["error"] for c in data["candidates"])
    assert len(data["candidates"]) == data["search"]["accepted"]


def test_fixpoint_failure_is_unsound(monkeypatch):
    import noiseless.analysis as an

    real = an.verify_fixpoint_set

    def broken(*args, **kwargs):
        from dataclasses import replace

        return replace(real(*args, **kwargs), forward_pass=False)

    monkeypatch.setattr(an, "verify_fixpoint_set", broken)
    r = run_analysis(catalog.z_dephasing(), AnalysisConfig(timestamp=False, trials=2))
    assert not r.sound and not r.data["theorem_checks"]["theorem1"]["passed"]


def test_console_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "noiseless.cli", "analyze", "--example", "identity", "--trials", "2", "--no-timestamp"],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0, out.stderr
    assert "1_1 ⊗ M_2" in out.stdout
