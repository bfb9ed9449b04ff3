import csv
import io
import json
import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import jsonschema
import pytest
from referencing import Registry, Resource

from flatcycles.cli import main

SCHEMAS = Path(__file__).resolve().parent.parent / "schemas"
SVG_NS = "{http://www.w3.org/2000/svg}"


def _registry() -> Registry:
    resources = []
    for p in SCHEMAS.glob("*.schema.json"):
        data = json.loads(p.read_text(encoding="utf-8"))
        res = Resource.from_contents(data)
        resources += [(data["$id"], res), (p.name, res)]
    return Registry().with_resources(resources)


REGISTRY = _registry()


def validate(instance, name):
    schema = json.loads((SCHEMAS / name).read_text(encoding="utf-8"))
    jsonschema.Draft202012Validator(schema, registry=REGISTRY).validate(instance)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    report = json.loads(out)
    validate(report, "run_report.schema.json")
    assert report["exit_code"] == code
    return code, report, out


def _strip_timing(text: str) -> str:
    data = json.loads(text)
    data.pop("timing")
    return json.dumps(data, sort_keys=True)


# ---------------------------------------------------------------- algebra


def test_algebra_r1(capsys):
    code, rep, _ = run(["algebra", "--d", "2", "--a", "0+1√d", "--b", "-1"], capsys)
    assert code == 0
    res = rep["result"]
    validate(res, "algebra.schema.json")
    assert res["r"] == 1
    assert [e["split"] for e in res["embeddings"]] == [True, False]


def test_algebra_hilbert_modular(capsys, tmp_path):
    out = tmp_path / "alg.json"
    code, rep, _ = run(["algebra", "--d", "2", "--a", "1", "--b", "1", "--out", str(out)], capsys)
    assert code == 0 and rep["result"]["r"] == 2
    validate(json.loads(out.read_text(encoding="utf-8")), "algebra.schema.json")
    assert rep["outputs"] == [str(out)]


def test_algebra_ramified_warns(capsys):
    code, rep, _ = run(["algebra", "--d", "2", "--a", "-1", "--b", "-1"], capsys)
    assert code == 0
    assert rep["result"]["r"] == 0
    assert any("no split real place" in w for w in rep["warnings"])


def test_parse_error_exit_2(capsys):
    code, rep, _ = run(["algebra", "--d", "2", "--a", "banana", "--b", "1"], capsys)
    assert code == 2 and "error" in rep


def test_bad_field_exit_2(capsys):
    code, _, _ = run(["algebra", "--d", "4", "--a", "1", "--b", "1"], capsys)
    assert code == 2


def test_argparse_usage_exit_2(capsys):
    assert main(["algebra", "--d", "2"]) == 2
    capsys.readouterr()


# ---------------------------------------------------------------- units


def test_units_listing(capsys, tmp_path):
    out = tmp_path / "units.json"
    code, rep, _ = run(["units", "--d", "2", "--a", "1", "--b", "1", "--height", "3", "--level", "2", "--out", str(out)], capsys)
    assert code == 0
    data = json.loads(out.read_text(encoding="utf-8"))
    validate(data, "units.schema.json")
    assert data["count"] == len(data["units"]) == rep["result"]["count"]
    coords = [u["coords"] for u in data["units"]]
    assert ["3", "2√d", "0", "0"] in coords
    assert rep["result"]["in_congruence"] == sum(u["in_congruence"] for u in data["units"])


# ---------------------------------------------------------------- config


def _arcs(svg_path: Path) -> dict:
    root = ET.parse(svg_path).getroot()
    assert root.tag == SVG_NS + "svg"
    counts = {}
    for g in root.iter(SVG_NS + "g"):
        counts[g.get("id")] = sum(1 for p in g.iter(SVG_NS + "path") if p.get("class") == "arc")
    return counts


def test_config_svg_n3(capsys, tmp_path):
    svg = tmp_path / "out.svg"
    code, rep, _ = run(["config", "--n", "3", "--r", "1", "--svg", str(svg)], capsys)
    assert code == 0
    assert _arcs(svg) == {"factor-1": 6}
    validate(rep["result"]["config"], "config.schema.json")


def test_config_minimal(capsys):
    code, rep, _ = run(["config", "--n", "1"], capsys)
    assert code == 0
    assert rep["result"]["config"] == {"n": 1, "r": 1, "A": [[["-1", "1"]]], "B": [[["1/2", "3/2"]]]}
    assert rep["result"]["perturbation_radius"] == "1/4"


def test_config_n8_r2_schema(capsys, tmp_path):
    out, svg = tmp_path / "c.json", tmp_path / "c.svg"
    code, rep, _ = run(["config", "--n", "8", "--r", "2", "--out", str(out), "--svg", str(svg)], capsys)
    assert code == 0 and rep["result"]["pattern_holds"]
    validate(json.loads(out.read_text(encoding="utf-8")), "config.schema.json")
    assert _arcs(svg) == {"factor-1": 16, "factor-2": 16}


def test_config_bad_n(capsys):
    code, _, _ = run(["config", "--n", "0"], capsys)
    assert code == 2


def test_io_error_exit_2(capsys, tmp_path):
    code, rep, _ = run(["config", "--n", "1", "--out", str(tmp_path / "missing" / "c.json")], capsys)
    assert code == 2 and "I/O" in rep["error"]


# ---------------------------------------------------------------- certify


def test_certify_n1_demo(capsys, tmp_path):
    out, csv_path, svg = tmp_path / "cert.json", tmp_path / "m.csv", tmp_path / "a.svg"
    code, rep, _ = run(["certify", "--d", "2", "--a", "1", "--b", "1", "--n", "1", "--height", "5", "--level", "2",
                        "--out", str(out), "--csv", str(csv_path), "--svg", str(svg)], capsys)
    assert code == 0
    cert = json.loads(out.read_text(encoding="utf-8"))
    validate(cert, "certificate.schema.json")
    assert cert["verdict"] == "RankAtLeastN" and cert["n"] == 1
    assert cert["matrix"][0][0] != 0 and cert["sign_consistent"] == [[True]]
    rows = list(csv.reader(io.StringIO(csv_path.read_text(encoding="utf-8"))))
    assert rows[0] == ["", "B1"] and rows[1][0] == "A1" and int(rows[1][1]) == cert["matrix"][0][0]
    assert _arcs(svg) == {"factor-1": 2, "factor-2": 2}


def test_certify_starved_window(capsys):
    code, rep, _ = run(["certify", "--d", "2", "--a", "1", "--b", "1", "--n", "2", "--height", "1"], capsys)
    assert code == 4
    assert rep["result"]["verdict"] == "NotFound"
    assert "--height" in rep["result"]["hint"]


def test_certify_inconclusive_exit_3(capsys):
    code, rep, _ = run(["certify", "--d", "2", "--a", "1", "--b", "1", "--n", "1", "--height", "3", "--level", "1"], capsys)
    assert code == 3
    assert rep["result"]["verdict"] == "Inconclusive"
    assert any("increase congruence level m" in c for c in rep["result"]["certificate"]["caveats"])


def test_certify_ramified_is_usage_error(capsys):
    code, _, _ = run(["certify", "--d", "2", "--a", "-1", "--b", "-1"], capsys)
    assert code == 2


def test_certify_rewrites_presentation(capsys):
    # (−1, 1) over Q is split but a < 0; the command normalizes it before anchoring
    code, rep, _ = run(["certify", "--d", "1", "--a", "-1", "--b", "1", "--n", "1", "--height", "3", "--level", "2"], capsys)
    assert code in (0, 3, 4)
    assert any("rewritten" in w for w in rep["warnings"])


# ---------------------------------------------------------------- determinism


@pytest.mark.parametrize("argv", [
    ["config", "--n", "4", "--r", "2"],
    ["units", "--d", "2", "--a", "1", "--b", "1", "--height", "2"],
    ["certify", "--d", "2", "--a", "1", "--b", "1", "--n", "1", "--height", "4", "--level", "2"],
])
def test_byte_identical_reports(argv):
    cmd = [sys.executable, "-m", "flatcycles", *argv]
    first = subprocess.run(cmd, capture_output=True, text=True, check=False)
    second = subprocess.run(cmd, capture_output=True, text=True, check=False)
    assert first.returncode == second.returncode
    assert _strip_timing(first.stdout) == _strip_timing(second.stdout)
    a = json.loads(first.stdout)
    b = json.loads(second.stdout)
    a.pop("timing")
    b.pop("timing")
    assert json.dumps(a, indent=2) == json.dumps(b, indent=2)


def test_output_files_byte_identical(tmp_path):
    paths = []
    for k in range(2):
        out = tmp_path / f"cert{k}.json"
        subprocess.run([sys.executable, "-m", "flatcycles", "certify", "--d", "2", "--a", "1", "--b", "1",
                        "--n", "1", "--height", "4", "--level", "2", "--out", str(out)], capture_output=True, check=False)
        paths.append(out)
    assert paths[0].read_bytes() == paths[1].read_bytes()
