import json
import subprocess
import sys

import numpy as np
import pytest

from chanlink import io, make_family, random_channel
from chanlink.cli import main
from chanlink.errors import ShapeError
from chanlink.fidelity import discrimination_sweep


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("CHANLINK_MAX_DIM", raising=False)
    return tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_format_value():
    assert io.format_value(1.0) == "1.0"
    assert io.format_value(0.5) == "0.5"
    assert io.format_value(0.015625) == "0.015625"
    assert io.format_value(0.1 + 0.2) == "0.3"
    assert io.format_value(1e-20) == "1e-20"


def test_channel_round_trip_is_bit_exact(rng, tmp_path):
    for k in range(20):
        c = random_channel(in_legs=[("a", 2), ("b", 3)], out_legs=[("c", 2)], rng=rng)
        path = tmp_path / f"c{k}.json"
        io.store_channel(c, path)
        back = io.load_channel(path)
        assert back.in_legs == c.in_legs and back.out_legs == c.out_legs
        assert np.array_equal(back.choi.data, c.choi.data)
        assert io.dumps_channel(back) == path.read_text()


def test_channel_document_layout():
    doc = json.loads(io.dumps_channel(make_family("C", 0.5).channel))
    assert doc["schema_version"] == 1
    assert doc["legs_in"] == [{"label": "0", "dim": 2}]
    assert doc["legs_out"] == [{"label": "1", "dim": 2}]
    assert doc["choi"][0][3] == [0.5, 0.0] and doc["choi"][1][1] == [0.25, 0.0]


def test_bad_documents(tmp_path):
    doc = io.channel_to_document(make_family("C", 0.5).channel)
    with pytest.raises(ShapeError):
        io.channel_from_document({**doc, "schema_version": 9})
    with pytest.raises(ShapeError):
        io.channel_from_document({**doc, "choi": [[1, 2], [3, 4]]})
    with pytest.raises(ShapeError):
        io.channel_from_document({**doc, "legs_in": [{"label": "0", "dim": 3}]})


def test_sweep_csv_round_trip():
    c1, c0 = make_family("C", 1).channel, make_family("C", 0).channel
    text = io.sweep_to_csv(discrimination_sweep(c1, c0, 6, 0.01))
    lines = text.splitlines()
    assert lines[0] == "n,fidelity"
    assert lines[6] == "6,0.015625"
    assert "# n_tilde=6" in lines
    parsed = io.read_sweep_csv(text)
    assert parsed["rows"][-1] == (6, 0.015625)
    assert parsed["n_tilde"] == "6" and parsed["fid1"] == "0.5"


def test_family_command(workdir, capsys):
    assert run(capsys, "family", "C", "0.5", "-o", "c.json")[0] == 0
    c = io.load_channel("c.json")
    np.testing.assert_array_equal(c.choi.data, make_family("C", 0.5).choi)
    code, out, err = run(capsys, "family", "C", "-0.5")
    assert code == 2 and "-1/3 <= p <= 1" in err and out == ""
    d0 = run(capsys, "family", "D", "0")[1]
    c0 = run(capsys, "family", "C", "0")[1]
    assert d0 == c0


def test_verify_command(workdir, capsys):
    run(capsys, "family", "C", "0.3", "-o", "c.json")
    code, out, _ = run(capsys, "verify", "c.json")
    assert code == 0 and "ok: true" in out
    bad = io.channel_to_document(make_family("C", 0.3).channel)
    bad["choi"] = [[[2 * re, im] for re, im in row] for row in bad["choi"]]
    (workdir / "bad.json").write_text(json.dumps(bad))
    code, out, _ = run(capsys, "verify", "bad.json")
    assert code == 3 and "ok: false" in out and "tp_gap: 1.000e+00" in out


def test_dilate_command(workdir, capsys):
    run(capsys, "family", "C", "1", "-o", "id.json")
    code, out, _ = run(capsys, "dilate", "id.json", "-o", "v.json")
    assert code == 0 and "ancilla_dims: 1\n" in out
    v = io.load_isometry("v.json")
    assert v.d_anc == 1
    run(capsys, "random", "--d-in", "4", "--seed", "1", "-o", "m.json")
    run(capsys, "random", "--d-in", "4", "--seed", "2", "-o", "n.json")
    code, out, _ = run(capsys, "dilate", "m.json", "n.json", "--mode", "indirect")
    assert code == 0 and "ancilla_dims: 16 16\n" in out and "ancilla_dim_total: 256" in out
    code, out, _ = run(capsys, "dilate", "m.json", "n.json", "--mode", "direct")
    assert code == 0 and "ancilla_dims: 16\n" in out
    assert run(capsys, "dilate", "m.json", "--mode", "direct")[0] == 2


def test_dilate_rejects_invalid_channel(workdir, capsys):
    bad = io.channel_to_document(make_family("C", 0.3).channel)
    bad["choi"][0][0] = [5.0, 0.0]
    (workdir / "bad.json").write_text(json.dumps(bad))
    code, _, err = run(capsys, "dilate", "bad.json")
    assert code == 3 and err.startswith("error:")


def test_link_and_shared_dilation_commands(workdir, capsys):
    run(capsys, "random", "--in-legs", "0:2", "2:2", "--out-legs", "1:2", "3:2", "--seed", "3", "-o", "m.json")
    run(capsys, "random", "--in-legs", "3:2", "5:2", "--out-legs", "4:2", "6:2", "--seed", "4", "-o", "n.json")
    code, out, _ = run(capsys, "link", "m.json", "n.json", "--shared", "3", "-o", "mn.json")
    assert code == 0
    assert out == "in: 0:2 2:2 5:2\nout: 1:2 4:2 6:2\ncptp_ok: true\n"
    code, out, _ = run(capsys, "dilate", "m.json", "n.json", "--mode", "indirect", "--shared", "3")
    assert code == 0 and "ancilla_dims: 16 16" in out
    assert run(capsys, "link", "m.json", "n.json", "--shared", "9")[0] == 4
    assert run(capsys, "dilate", "m.json", "n.json", "--mode", "direct", "--shared", "1")[0] == 4


def test_fidelity_command(workdir, capsys):
    run(capsys, "family", "C", "1", "-o", "c1.json")
    run(capsys, "family", "C", "0", "-o", "c0.json")
    code, out, _ = run(capsys, "fidelity", "c1.json", "c1.json")
    assert code == 0 and out.startswith("fidelity: 1.0\n")
    code, out, _ = run(capsys, "fidelity", "c1.json", "c0.json")
    assert out.startswith("fidelity: 0.5\n")
    run(capsys, "family", "C", str(1 / 3), "-o", "c.json")
    run(capsys, "family", "D", str(1 / 3), "-o", "d.json")
    code, out, _ = run(capsys, "fidelity", "c.json", "d.json", "--cross-check")
    lines = dict(line.split(": ") for line in out.splitlines())
    assert float(lines["fidelity"]) == pytest.approx(0.879653, abs=1e-6)
    for key in ("general", "eigen_pairing", "uhlmann_overlap"):
        assert float(lines[key]) == pytest.approx(0.879653, abs=1e-6)
    assert float(lines["max_gap"]) <= 1e-9


def test_fidelity_eigen_on_non_commuting_pair(workdir, capsys):
    run(capsys, "family", "C", "0.5", "-o", "c.json")
    run(capsys, "random", "--seed", "5", "-o", "r.json")
    assert run(capsys, "fidelity", "c.json", "r.json", "--method", "eigen")[0] == 5
    assert run(capsys, "fidelity", "c.json", "r.json", "--method", "uhlmann")[0] == 5
    code, out, _ = run(capsys, "fidelity", "c.json", "r.json", "--cross-check")
    assert code == 0 and "eigen_pairing" not in out


def test_sweep_command(workdir, capsys):
    run(capsys, "family", "C", "1", "-o", "c1.json")
    run(capsys, "family", "C", "0", "-o", "c0.json")
    code, _, _ = run(capsys, "sweep", "c1.json", "c0.json", "--n-max", "6", "--epsilon", "0.01", "-o", "s.csv")
    lines = (workdir / "s.csv").read_text().splitlines()
    assert code == 0 and lines[6] == "6,0.015625" and "# n_tilde=6" in lines

    code, out, _ = run(capsys, "sweep", "c1.json", "c1.json", "--n-max", "3")
    assert out.splitlines()[1:4] == ["1,1.0", "2,1.0", "3,1.0"] and "# n_tilde=-1" in out

    run(capsys, "family", "C", str(1 / 3), "-o", "c.json")
    run(capsys, "family", "D", str(1 / 3), "-o", "d.json")
    _, out, _ = run(capsys, "sweep", "c.json", "d.json", "--n-max", "3")
    rows = io.read_sweep_csv(out)["rows"]
    np.testing.assert_allclose([v for _, v in rows], [0.879653, 0.773789, 0.6806657], atol=1e-6)

    assert run(capsys, "sweep", "c1.json", "c0.json", "--epsilon", "1.5")[0] == 2


def test_max_dim_flag_and_env(workdir, capsys, monkeypatch):
    run(capsys, "family", "C", "1", "-o", "c1.json")
    run(capsys, "family", "C", "0", "-o", "c0.json")
    _, out, _ = run(capsys, "--max-dim", "16", "sweep", "c1.json", "c0.json", "--n-max", "4")
    assert "# checked_n=1,2\n" in out
    monkeypatch.setenv("CHANLINK_MAX_DIM", "4")
    _, out, _ = run(capsys, "sweep", "c1.json", "c0.json", "--n-max", "4")
    assert "# checked_n=1\n" in out


def test_missing_file_and_usage_errors(workdir, capsys):
    code, _, err = run(capsys, "verify", "nope.json")
    assert code == 2 and err.startswith("error:")
    with pytest.raises(SystemExit) as exc:
        main(["family"])
    assert exc.value.code == 2


def test_module_entry_point_is_deterministic(workdir):
    cmd = [sys.executable, "-m", "chanlink", "random", "--d-in", "2", "--seed", "11"]
    a = subprocess.run(cmd, capture_output=True, check=True)
    b = subprocess.run(cmd, capture_output=True, check=True)
    assert a.stdout == b.stdout and a.stdout.endswith(b"\n")
