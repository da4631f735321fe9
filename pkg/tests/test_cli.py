import math

import pytest

import potens.cli as cli
from potens.errors import ConvergenceError


def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr().out
    return code, out


def test_poly_disk_zero_error_column(capsys):
    code, out = run_cli(["poly", "--domain", "disk", "--nmax", "6", "--s", "25"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,s,kappa_exact,kappa_pred,rel_err,fitted_rate,coeffs"
    rel_errs = [float(line.split(",")[4]) for line in lines[1:]]
    assert max(rel_errs) < 1e-12
    # ascending complex coefficient list: degree-2 row ends with the leading term
    from potens.geometry import parse_complex
    coeffs = [parse_complex(t) for t in lines[3].split(",")[6].split(";")]
    assert len(coeffs) == 3
    assert coeffs[2].real == pytest.approx(math.sqrt(3 / math.pi * (1 - 3 / 25)))
    assert abs(coeffs[0]) < 1e-13 and abs(coeffs[1]) < 1e-13


def test_poly_ellipse_rate_column(capsys):
    code, out = run_cli(["poly", "--domain", "ellipse", "--q", "0.5",
                         "--N", "4,8,12,16,20", "--srule", "cn", "--s", "2"], capsys)
    assert code == 0
    last = out.strip().splitlines()[-1].split(",")
    fitted = float(last[5])
    assert fitted == pytest.approx(2 * math.log(0.5), rel=0.1)


def test_scaling_rows(capsys):
    code, out = run_cli(["scaling", "--domain", "disk", "--N", "20,40",
                         "--srule", "cn", "--s", "2",
                         "--a", "0,0.3+0.2i", "--b", "0"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "N,a,b,ratio_re,ratio_im,predictor_re,predictor_im,abs_err"
    # a=b=0 rows have ratio exactly 1
    zero_rows = [l for l in lines[1:] if l.split(",")[1] == "0"]
    for row in zero_rows:
        assert float(row.split(",")[3]) == 1.0
    # abs_err decreases with N for the nonzero offset
    errs = [float(l.split(",")[-1]) for l in lines[1:] if l.split(",")[1] != "0"]
    assert errs[1] < errs[0]


def test_scaling_weighted_undefined_marker(capsys):
    code, out = run_cli(["scaling", "--domain", "disk", "--N", "10", "--srule", "inf",
                         "--ell", "0", "--weighted", "--a", "1i", "--b", "-0.3"], capsys)
    assert code == 0
    assert "undefined" in out


def test_corr_series(capsys):
    code, out = run_cli(["corr", "--ell", "0", "--bins", "5"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    r1t = [l for l in lines if l.startswith("r1_tangent")]
    assert all(float(l.split(",")[-1]) == 1.0 for l in r1t)
    # ell=0 surface vanishes once either offset is outward
    surf = [l for l in lines if l.startswith("r2_surface")]
    for l in surf:
        parts = l.split(",")
        a, b, v = float(parts[3]), float(parts[4]), float(parts[5])
        if a > 0 or b > 0:
            assert v == 0.0
    # diagonal of the surface vanishes
    for l in surf:
        parts = l.split(",")
        if parts[3] == parts[4]:
            assert abs(float(parts[5])) < 1e-12


def test_gap_table(capsys):
    code, out = run_cli(["gap", "--domain", "disk", "--N", "4", "--s", "6",
                         "--radius", "0.5"], capsys)
    assert code == 0
    rows = dict()
    for line in out.strip().splitlines()[1:]:
        kind, _, value = line.split(",")
        rows.setdefault(kind, value)
    assert abs(float(rows["value"]) - float(rows["radial_oracle"])) < 1e-6
    assert float(rows["abs_err"]) < 1e-6


def test_gap_general_domain_term_decay(capsys):
    code, out = run_cli(["gap", "--domain", "ellipse", "--q", "0.5", "--N", "4",
                         "--s", "8", "--radius", "0.4", "--center", "0.2"], capsys)
    assert code == 0
    terms = [abs(float(l.split(",")[2])) for l in out.strip().splitlines()
             if l.startswith("term")]
    assert all(terms[i + 1] < terms[i] for i in range(len(terms) - 1))
    assert "radial_oracle" not in out


def test_levelsets(capsys):
    code, out = run_cli(["levelsets", "--domain", "disk", "--levels", "1,2", "--bins", "8"], capsys)
    assert code == 0
    for line in out.strip().splitlines()[1:]:
        level, _, re, im = (float(x) for x in line.split(","))
        assert math.hypot(re, im) == pytest.approx(level, abs=1e-12)


def test_sample_csv(capsys):
    code, out = run_cli(["sample", "--domain", "disk", "--N", "4", "--s", "6",
                         "--seed", "9"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "index,re,im"
    assert len(lines) == 5


def test_byte_identical_reruns(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["scaling", "--domain", "ellipse", "--q", "0.25", "--N", "12",
            "--srule", "cn", "--s", "2", "--a", "0.2+0.1i", "--b", "-0.1"]
    assert cli.main(args + ["--out", str(out1)]) == 0
    assert cli.main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_config_round_trip(tmp_path):
    text = ("domain=kind=ellipse q=0.5\n" "N=4,8\n" "nmax=8\n" "srule=cn\n" "s=2\n"
            "theta=0\n" "a=0.3+0.2i\n" "b=-0.1\n" "seed=3\n" "tol=1e-11\n")
    cfg = cli.config_from_text(text)
    again = cli.config_from_text(cli.config_to_text(cfg))
    assert again == cfg


def test_config_file_with_flag_override(tmp_path, capsys):
    cfgfile = tmp_path / "study.cfg"
    cfgfile.write_text("domain=disk\nnmax=3\ns=25\n")
    code, out = run_cli(["poly", "--config", str(cfgfile), "--nmax", "2"], capsys)
    assert code == 0
    assert len(out.strip().splitlines()) == 1 + 3  # header + degrees 0..2


def test_exit_code_config_error(capsys):
    code = cli.main(["poly", "--domain", "disk", "--N", "30", "--s", "20"])
    assert code == 2
    assert "config error" in capsys.readouterr().err
    code = cli.main(["corr", "--bins", "4"])
    assert code == 2
    code = cli.main(["sample", "--domain", "ellipse", "--q", "0.3", "--N", "3", "--s", "8"])
    assert code == 2


def test_exit_code_nonconvergence(monkeypatch, capsys):
    def boom(cfg):
        raise ConvergenceError("did not settle")
    monkeypatch.setitem(cli._COMMANDS, "poly", boom)
    code = cli.main(["poly", "--domain", "disk", "--nmax", "2", "--s", "25"])
    assert code == 3
    assert "non-convergence" in capsys.readouterr().err


def test_invalid_pairs_rejected_at_parse():
    with pytest.raises(cli.ConfigError):
        cli.config_from_pairs({"domain": "disk", "N": "30", "s": "20"})
    cli.config_from_pairs({"domain": "disk", "N": "19", "s": "20"})  # boundary case ok
