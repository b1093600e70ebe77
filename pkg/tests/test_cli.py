import json
import subprocess
import sys

import pytest

from qplane.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from qplane.io import modes_to_json, read_modes
from qplane.lattice import QLattice
from qplane.modes import ModeFunction, basis


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_measure_json_is_deterministic(capsys):
    c1, a, _ = run(["verify", "--suite", "measure", "--seed", "1"], capsys)
    c2, b, _ = run(["verify", "--suite", "measure", "--seed", "1"], capsys)
    strip = lambda t: {k: v for k, v in json.loads(t).items() if k != "wall_time_s"}
    assert c1 == c2 == EXIT_OK
    assert strip(a) == strip(b)


def test_verify_text_and_csv(capsys, tmp_path):
    code, out, _ = run(["verify", "--suite", "fq", "--format", "text"], capsys)
    assert code == EXIT_OK and out.splitlines()[-1].startswith("hard:")
    path = tmp_path / "r.csv"
    code, out, _ = run(["verify", "--suite", "fq,measure", "--format", "csv", "--out", str(path)], capsys)
    assert code == EXIT_OK and out == ""
    assert path.read_text().startswith("id,kind,passed")


def test_verify_exit_codes(capsys):
    assert run(["verify", "--q", "1.5"], capsys)[0] == EXIT_USAGE
    assert run(["verify", "--ntheta", "100"], capsys)[0] == EXIT_USAGE
    code, out, _ = run(["verify", "--suite", "fourier", "--kmin", "-1", "--kmax", "1"], capsys)
    assert code == EXIT_FAIL
    assert json.loads(out)["summary"]["hard_failed"] > 0
    with pytest.raises(SystemExit) as info:
        main(["verify", "--suite", "bogus"])
    assert info.value.code == EXIT_USAGE


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("QPLANE_THREADS", "zero")
    assert run(["verify", "--suite", "measure"], capsys)[0] == EXIT_USAGE
    monkeypatch.setenv("QPLANE_THREADS", "2")
    assert run(["verify", "--suite", "measure,fq"], capsys)[0] == EXIT_OK


def test_fq_point(capsys):
    code, out, _ = run(["fq", "--point", "0", "0"], capsys)
    assert code == EXIT_OK and complex(out.strip()) == 1
    _, out, _ = run(["fq", "--point", "0", "1.0"], capsys)
    assert abs(complex(out.strip()) - (0.06775040350564943 - 0.9977023017036806j)) <= 1e-12
    assert run(["fq", "--point", "x", "1"], capsys)[0] == EXIT_USAGE
    assert run(["fq", "--point", "0", "0", "--q", "0"], capsys)[0] == EXIT_USAGE


def test_fq_circle(capsys):
    code, out, _ = run(["fq", "--circle", "-2", "--ntheta", "8"], capsys)
    rows = out.strip().splitlines()
    assert code == EXIT_OK and rows[0] == "k,theta,re,im" and len(rows) == 9
    for row in rows[1:]:
        k, _, re_, im_ = row.split(",")
        assert k == "-2" and abs(abs(complex(float(re_), float(im_))) - 1) < 1e-12
    assert run(["fq", "--circle", "0", "--ntheta", "0"], capsys)[0] == EXIT_USAGE


def test_transform_round_trip(capsys, tmp_path):
    src = tmp_path / "f.json"
    src.write_text(modes_to_json(basis(QLattice(0.5), 0, 0)))
    dst = tmp_path / "out.json"
    code, _, _ = run(["transform", "--in", str(src), "--out", str(dst)], capsys)
    assert code == EXIT_OK
    g = read_modes(dst)
    assert abs(g[(0, 0)] - (-0.3042033728076831)) <= 1e-12
    side = json.loads((tmp_path / "out.json.tail.json").read_text())
    assert side["output_window"] == [-12, 12] and 0 < side["tail"] < 1e-2


def test_transform_stdout_and_csv(capsys, tmp_path):
    src = tmp_path / "f.csv"
    src.write_text("k,l,re,im\n0,1,1,0\n")
    code, out, err = run(["transform", "--in", str(src), "--q", "0.5", "--format", "csv",
                          "--kmin", "-6", "--kmax", "6", "--lmax", "8", "--ntheta", "64"], capsys)
    assert code == EXIT_OK
    assert out.startswith("# q=0.5\nk,l,re,im\n")
    assert json.loads(err)["kernel_window"] == [-6, 6]


def test_transform_usage_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"q": 0.5,\n "modes": [\n')
    code, _, err = run(["transform", "--in", str(bad)], capsys)
    assert code == EXIT_USAGE and "bad.json:3" in err
    ok = tmp_path / "ok.json"
    ok.write_text(modes_to_json(ModeFunction(QLattice(0.5), {(-13, 0): 1.0, (13, 0): 1.0})))
    assert run(["transform", "--in", str(ok)], capsys)[0] == EXIT_USAGE
    assert run(["transform", "--in", str(ok), "--kmin", "3", "--kmax", "2"], capsys)[0] == EXIT_USAGE
    assert run(["transform", "--in", str(tmp_path / "none.json")], capsys)[0] == EXIT_USAGE


def test_convergence_kwindow(capsys):
    code, out, _ = run(["convergence", "--axis", "kwindow", "--values", "8,12,16"], capsys)
    lines = out.strip().splitlines()
    assert code == EXIT_OK
    assert lines[0] == "kwindow,relations,plancherel,unitarity,parseval"
    assert [l.split(",")[0] for l in lines[1:4]] == ["8", "12", "16"]
    assert lines[4].split(",")[:4] == ["monotone", "true", "true", "true"]


def test_convergence_single_value_has_no_flag_row(capsys):
    code, out, _ = run(["convergence", "--axis", "ntheta", "--values", "128"], capsys)
    assert code == EXIT_OK and len(out.strip().splitlines()) == 2


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "qplane.cli", "fq", "--point", "2", "0.5"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert abs(complex(res.stdout.strip()) - (0.9630983269891292 - 0.2691497957471643j)) <= 1e-12
