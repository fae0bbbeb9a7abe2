import json

from icepack.cli import main


def test_random_compile_simulate(tmp_path, capsys):
    qasm = tmp_path / "c.qasm"
    assert main(["random", "--qubits", "4", "--gates-per-qubit", "5", "--seed", "3", "--out", str(qasm)]) == 0
    assert qasm.read_text().startswith("OPENQASM 2.0;")

    out = tmp_path / "out"
    assert main(["compile", "--input", str(qasm), "--density", "2.0", "--out", str(out)]) == 0
    for name in ("physical.json", "physical.qasm", "report.json"):
        assert (out / name).exists()
    report = json.loads((out / "report.json").read_text())
    assert report["resources"]["patch_count"] == 2

    sim = tmp_path / "sim.json"
    args = ["simulate", "--circuit", str(out), "--shots", "2000", "--seed", "1", "--alpha", "0",
            "--out", str(sim)]
    assert main(args) == 0
    rep = json.loads(sim.read_text())
    assert rep["lsr"] == 1.0 and rep["tvd"] < 0.1
    first = sim.read_text()
    assert main(args) == 0
    assert sim.read_text() == first


def test_naive_compile_and_score(tmp_path, bell_qasm):
    f = tmp_path / "bell.qasm"
    f.write_text(bell_qasm)
    out = tmp_path / "naive"
    assert main(["compile", "--input", str(f), "--passes", "", "--out", str(out)]) == 0
    csv = tmp_path / "m.csv"
    assert main(["score", "--input", str(f), "--out", str(csv)]) == 0
    assert csv.read_text().splitlines()[0] == "i,j,w,s1,s2,delay,T"


def test_bench(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"experiment": "density", "qubits": 6, "gates_per_qubit": 3,
                                "circuits": 1, "perms": 2, "densities": [2.0]}))
    assert main(["bench", "--spec", str(spec), "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "b" / "density.csv").exists()
    assert (tmp_path / "b" / "density.json").exists()


def test_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.qasm"
    bad.write_text("OPENQASM 2.0; qreg q[2]; t q[0];")
    assert main(["compile", "--input", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert "error:" in capsys.readouterr().err
    assert main(["compile", "--input", str(tmp_path / "missing.qasm"), "--out", str(tmp_path / "x")]) == 2
