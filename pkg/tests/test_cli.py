import json
import os
import subprocess
import sys

import pytest

from arpcheck import report
from arpcheck.cli import main

from conftest import CORPUS, MANIFEST, MAPPINGS

APPS = os.path.join(CORPUS, "apps")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_inter_component_bug_exits_one(capsys):
    code, out, _ = run(capsys, "analyze", os.path.join(APPS, "icc_settings.buggy.air"), "--mappings", MAPPINGS, "--json")
    assert code == 1
    doc = report.loads(out)
    assert doc["app"] == "com.example.appmanager"
    assert len(doc["findings"]) == 1
    f = doc["findings"][0]
    assert f["kind"] == "type1" and f["component"] == "SettingsActivity"
    assert f["entry"] == "onClick:settings_onClick"
    assert f["api"] == "java.io.File.delete()" and f["levels"] == [28]
    assert f["path"] == ["settings_onClick/b0/0", "clearCache/b0/0"]
    assert set(f) == {"kind", "api", "component", "entry", "path", "levels", "evidence",
                      "suppressed_by", "matched_checks"}


def test_analyze_clean_exits_zero(capsys):
    code, out, _ = run(capsys, "analyze", os.path.join(APPS, "icc_picker.patched.air"), "--mappings", MAPPINGS)
    assert code == 0
    assert out.strip().endswith("0 findings")


def test_analyze_input_errors_exit_two(capsys, tmp_path):
    bad = tmp_path / "bad.air"
    bad.write_text("app x targetSdk\n")
    code, _, err = run(capsys, "analyze", str(bad), "--mappings", MAPPINGS)
    assert code == 2 and "expected" in err
    code, _, _ = run(capsys, "analyze", str(tmp_path / "missing.air"), "--mappings", MAPPINGS)
    assert code == 2
    code, _, _ = run(capsys, "analyze", os.path.join(APPS, "icc_picker.patched.air"), "--mappings", str(tmp_path))
    assert code == 2


def test_json_is_byte_stable_and_round_trips(capsys):
    path = os.path.join(APPS, "new_api.buggy.air")
    _, first, _ = run(capsys, "analyze", path, "--mappings", MAPPINGS, "--json")
    _, second, _ = run(capsys, "analyze", path, "--mappings", MAPPINGS, "--json")
    assert first == second
    assert report.dumps(report.loads(first)) == first


def test_verbose_shows_suppressed(capsys):
    path = os.path.join(APPS, "guarded_recorder.patched.air")
    code, out, _ = run(capsys, "analyze", path, "--mappings", MAPPINGS, "--json")
    assert code == 0 and json.loads(out)["findings"] == []
    code, out, _ = run(capsys, "analyze", path, "--mappings", MAPPINGS, "--json", "--verbose")
    assert code == 0
    assert [f["suppressed_by"] for f in json.loads(out)["findings"]] == ["trycatch"]


def test_debug_dumps(capsys, tmp_path):
    dot, df, ctx = tmp_path / "g.dot", tmp_path / "df.json", tmp_path / "ctx.json"
    run(capsys, "analyze", os.path.join(APPS, "wrapper_check.patched.air"), "--mappings", MAPPINGS,
        "--dot", str(dot), "--dump-dataflow", str(df), "--dump-contexts", str(ctx))
    assert '"cam_onResume" -> "withPermission"' in dot.read_text()
    assert json.loads(df.read_text())["withPermission/b0/0"] == ["android.permission.CAMERA"]
    assert any(c["kind"] == "dangerous" for c in json.loads(ctx.read_text()))


def test_config_file_and_env(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "a.conf"
    cfg.write_text("estimate = sideways\n")
    code, _, _ = run(capsys, "--config", str(cfg), "analyze", os.path.join(APPS, "icc_picker.patched.air"),
                     "--mappings", MAPPINGS)
    assert code == 2
    monkeypatch.setenv("ARPCHECK_CONFIG", str(cfg))
    code, _, _ = run(capsys, "analyze", os.path.join(APPS, "icc_picker.patched.air"), "--mappings", MAPPINGS)
    assert code == 2


def test_bench_table(capsys):
    code, out, _ = run(capsys, "bench", MANIFEST, "--mappings", MAPPINGS)
    assert code == 0
    lines = out.splitlines()
    assert lines[1].split() == ["Type-1", "10", "10", "0", "0", "100.00", "100.00", "100.00"]
    assert lines[2].split() == ["Type-2", "5", "5", "0", "0", "100.00", "100.00", "100.00"]
    assert lines[3].split() == ["Failed", "0"]


def test_bench_json_parallel(capsys):
    code, out, _ = run(capsys, "bench", MANIFEST, "--mappings", MAPPINGS, "--json", "--jobs", "4")
    doc = json.loads(out)
    assert doc["metrics"]["type1"]["tp"] == 10 and doc["failed"] == []


def test_diff_mappings(capsys):
    code, out, _ = run(capsys, "diff-mappings", MAPPINGS, "28", "29", "--json")
    assert code == 0
    doc = json.loads(out)
    assert {"api": "android.telephony.TelephonyManager.getDeviceId()", "change": "restricted"} in doc["changed"]
    code, _, _ = run(capsys, "diff-mappings", MAPPINGS, "29", "28")
    assert code == 2


def test_extract_stubs(capsys, tmp_path):
    stubs = tmp_path / "stubs.txt"
    stubs.write_text("permission android.permission.CAMERA dangerous\n"
                     "class android.hardware.Camera {\n  @RequiresPermission(CAMERA)\n  public static Camera open();\n}\n")
    out = tmp_path / "level-27.json"
    code, _, _ = run(capsys, "extract-stubs", str(stubs), "--level", "27", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["apis"] == {"android.hardware.Camera.open()": {"mode": "anyOf", "perms": ["android.permission.CAMERA"]}}
    code, _, _ = run(capsys, "extract-stubs", str(stubs), "--level", "40")
    assert code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "arpcheck", "analyze", os.path.join(APPS, "device_id.buggy.air"),
                           "--mappings", MAPPINGS], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "levels 29,30" in proc.stdout


@pytest.mark.parametrize("argv", [[], ["analyze"], ["frobnicate"]])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2
