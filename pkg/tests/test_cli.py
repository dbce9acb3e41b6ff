import json

import numpy as np
import pytest

from uqi.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    lines = [l for l in text.split("\n") if l != ""]
    header = lines[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
    return header, rows


def test_probabilities_reference_points(capsys):
    code, out, _ = run_cli(capsys, "probabilities", "--T", "1", "--gamma", "0", "--phi", "0")
    assert code == 0
    _, rows = parse_csv(out)
    assert len(rows) == 1
    assert float(rows[0]["p_h"]) == pytest.approx(0.0, abs=1e-12)
    assert float(rows[0]["p_g"]) == pytest.approx(1.0, abs=1e-12)

    code, out, _ = run_cli(capsys, "probabilities", "--T", "0", "--phi", "0")
    _, rows = parse_csv(out)
    assert float(rows[0]["p_h"]) == pytest.approx(0.5, abs=1e-12)

    code, out, _ = run_cli(
        capsys, "probabilities", "--T", "0.8", "--gamma", "1.0471975512", "--phi", "0"
    )
    _, rows = parse_csv(out)
    assert float(rows[0]["p_h"]) == pytest.approx(0.3, abs=1e-9)


def test_probabilities_grid_and_degrees(capsys):
    code, out, _ = run_cli(
        capsys, "probabilities", "--T", "0.5,1.0", "--gamma", "60", "--phi", "0,90",
        "--degrees",
    )
    assert code == 0
    _, rows = parse_csv(out)
    assert len(rows) == 4
    # gamma echoed in radians
    assert float(rows[0]["gamma"]) == pytest.approx(np.pi / 3, abs=1e-9)
    assert float(rows[0]["p_h"]) == pytest.approx(0.5 * (1 - 0.5 * np.cos(np.pi / 3)), abs=1e-9)


def test_csv_and_json_carry_identical_values(capsys):
    args = ["sweep", "--T", "0.8", "--gamma", "0.5", "--phi-points", "6", "--shots", "1000"]
    code, out_csv, _ = run_cli(capsys, *args, "--format", "csv")
    assert code == 0
    code, out_json, _ = run_cli(capsys, *args, "--format", "json")
    assert code == 0
    _, rows = parse_csv(out_csv)
    doc = json.loads(out_json)
    assert doc["metadata"]["seed"] == 42
    assert len(doc["results"]) == len(rows)
    for rec, row in zip(doc["results"], rows):
        for key, val in rec.items():
            cell = row[key]
            if val is None:
                assert cell == ""
            elif isinstance(val, bool):
                assert cell == ("true" if val else "false")
            elif isinstance(val, (int, float)) and not isinstance(val, bool):
                assert float(cell) == val
            else:
                assert cell == str(val)


def test_byte_identical_reruns(capsys):
    args = ["probabilities", "--T", "0.4", "--gamma", "0.3", "--phi-points", "5",
            "--shots", "2000", "--seed", "9"]
    _, out1, _ = run_cli(capsys, *args)
    _, out2, _ = run_cli(capsys, *args)
    assert out1 == out2
    args_json = args + ["--format", "json"]
    _, out3, _ = run_cli(capsys, *args_json)
    _, out4, _ = run_cli(capsys, *args_json)
    assert out3 == out4


def test_sweep_analytic_footer_roundtrip(capsys):
    code, out, _ = run_cli(
        capsys, "sweep", "--T", "0.8", "--gamma", "1.0471975511965976", "--phi-points", "12"
    )
    assert code == 0
    _, rows = parse_csv(out)
    samples = [r for r in rows if r["record"] == "sample"]
    est = [r for r in rows if r["record"] == "estimate"]
    assert len(samples) == 12
    assert len(est) == 1
    assert float(est[0]["t_hat"]) == pytest.approx(0.8, abs=1e-12)
    assert float(est[0]["gamma_hat"]) == pytest.approx(np.pi / 3, abs=1e-12)
    assert est[0]["method"] == "least-squares"
    assert est[0]["degenerate"] == "false"
    assert est[0]["stderr_t"] == ""


def test_sweep_degenerate_footer(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--T", "0", "--phi-points", "8")
    assert code == 0
    _, rows = parse_csv(out)
    est = [r for r in rows if r["record"] == "estimate"][0]
    assert est["degenerate"] == "true"
    assert est["gamma_hat"] == ""


def test_sweep_shot_mode_footer_has_stderr(capsys):
    code, out, _ = run_cli(
        capsys, "sweep", "--T", "0.6", "--gamma", "-1.0", "--phi-points", "12",
        "--shots", "100000",
    )
    assert code == 0
    _, rows = parse_csv(out)
    est = [r for r in rows if r["record"] == "estimate"][0]
    assert abs(float(est["t_hat"]) - 0.6) < 0.02
    assert abs(float(est["gamma_hat"]) + 1.0) < 0.04
    assert float(est["stderr_t"]) > 0
    assert float(est["stderr_gamma"]) > 0


def test_sweep_two_point_default_for_two_phases(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--T", "0.5", "--gamma", "0.2", "--phi", "0,1.5707963267948966")
    assert code == 0
    _, rows = parse_csv(out)
    est = [r for r in rows if r["record"] == "estimate"][0]
    assert est["method"] == "two-point"
    assert float(est["t_hat"]) == pytest.approx(0.5, abs=1e-12)


def test_werner_table(capsys):
    code, out, _ = run_cli(capsys, "werner", "--T", "0.8", "--xi", "0,0.5,0.6666666666666666,0.75,1")
    assert code == 0
    _, rows = parse_csv(out)
    amps = {float(r["xi"]): float(r["modulation_amplitude"]) for r in rows}
    assert amps[0.0] == pytest.approx(0.8, abs=1e-12)
    assert amps[0.5] == pytest.approx(0.4, abs=1e-12)
    assert amps[1.0] == pytest.approx(0.0, abs=1e-12)
    assert amps[0.75] == pytest.approx(0.2, abs=1e-12)  # image persists when separable
    ppt = {float(r["xi"]): float(r["ppt_min_eigenvalue"]) for r in rows}
    assert ppt[0.0] < -1e-6
    assert ppt[0.5] < -1e-6
    assert abs(ppt[2 / 3]) < 1e-9
    assert ppt[0.75] > -1e-10
    # offsets are reported for comparison, not asserted against any formula
    assert "offset_raw" in rows[0] and "offset_conditioned" in rows[0]


def test_werner_default_transmission_is_unity(capsys):
    code, out, _ = run_cli(capsys, "werner", "--xi", "0,1")
    assert code == 0
    _, rows = parse_csv(out)
    amps = {float(r["xi"]): float(r["modulation_amplitude"]) for r in rows}
    assert amps[0.0] == pytest.approx(1.0, abs=1e-12)
    assert amps[1.0] == pytest.approx(0.0, abs=1e-12)


def test_werner_rejects_bad_xi(capsys):
    code, _, err = run_cli(capsys, "werner", "--xi", "0,1.5")
    assert code == 2
    assert err != ""


def test_chi_identity_single_entry(capsys):
    code, out, _ = run_cli(capsys, "chi", "--T", "1", "--gamma", "0")
    assert code == 0
    _, rows = parse_csv(out)
    nonzero = [
        r for r in rows if abs(float(r["re"])) > 1e-12 or abs(float(r["im"])) > 1e-12
    ]
    assert len(nonzero) == 1
    assert nonzero[0]["row"] == "0" and nonzero[0]["col"] == "0"
    assert float(nonzero[0]["re"]) == pytest.approx(2.0, abs=1e-12)


def test_probe_dump_has_four_entries_of_half(capsys):
    code, out, _ = run_cli(capsys, "probe")
    assert code == 0
    _, rows = parse_csv(out)
    assert len(rows) == 256
    nonzero = [
        r for r in rows if abs(float(r["re"])) > 1e-12 or abs(float(r["im"])) > 1e-12
    ]
    assert len(nonzero) == 4
    for r in nonzero:
        assert abs(float(r["re"])) == pytest.approx(0.5, abs=1e-12)


def test_schmidt_dump_coefficients(capsys):
    code, out, _ = run_cli(capsys, "schmidt", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    coeffs = [r for r in doc["results"] if r["kind"] == "coeff"]
    assert len(coeffs) == 4
    assert all(abs(c["re"] - 0.5) < 1e-12 for c in coeffs)
    assert all(c["hermitian"] for c in coeffs)


def test_image_analytic_reconstruction(tmp_path, capsys):
    rng = np.random.default_rng(4)
    t_map = rng.uniform(0.2, 1.0, size=(4, 3)).round(6)
    g_map = rng.uniform(-3.0, 3.0, size=(4, 3)).round(6)
    t_file = tmp_path / "t.csv"
    g_file = tmp_path / "g.csv"
    np.savetxt(t_file, t_map, delimiter=",")
    np.savetxt(g_file, g_map, delimiter=",")
    code, out, _ = run_cli(
        capsys, "image", "--t-map", str(t_file), "--gamma-map", str(g_file),
        "--phi", "0,1.5707963267948966",
    )
    assert code == 0
    _, rows = parse_csv(out)
    assert len(rows) == 12
    for r in rows:
        i, j = int(r["row"]), int(r["col"])
        assert float(r["t_hat"]) == pytest.approx(t_map[i, j], abs=1e-12)
        assert float(r["gamma_hat"]) == pytest.approx(g_map[i, j], abs=1e-12)
        assert abs(float(r["t_error"])) < 1e-12
        assert abs(float(r["gamma_error"])) < 1e-12
        assert r["status"] == ""


def test_image_opaque_map_all_degenerate(tmp_path, capsys):
    t_file = tmp_path / "t.csv"
    g_file = tmp_path / "g.csv"
    np.savetxt(t_file, np.zeros((2, 2)), delimiter=",")
    np.savetxt(g_file, np.zeros((2, 2)), delimiter=",")
    code, out, _ = run_cli(
        capsys, "image", "--t-map", str(t_file), "--gamma-map", str(g_file),
        "--phi", "0,1.5707963267948966",
    )
    assert code == 0
    _, rows = parse_csv(out)
    assert all(r["degenerate"] == "true" for r in rows)
    assert all(r["gamma_hat"] == "" for r in rows)


def test_image_shape_mismatch_is_config_error(tmp_path, capsys):
    t_file = tmp_path / "t.csv"
    g_file = tmp_path / "g.csv"
    np.savetxt(t_file, np.full((2, 2), 0.5), delimiter=",")
    np.savetxt(g_file, np.zeros((3, 2)), delimiter=",")
    code, _, err = run_cli(
        capsys, "image", "--t-map", str(t_file), "--gamma-map", str(g_file),
    )
    assert code == 2
    assert "shape" in err


def test_image_missing_file_is_io_error(tmp_path, capsys):
    g_file = tmp_path / "g.csv"
    np.savetxt(g_file, np.zeros((2, 2)), delimiter=",")
    code, _, err = run_cli(
        capsys, "image", "--t-map", str(tmp_path / "missing.csv"), "--gamma-map", str(g_file),
    )
    assert code == 3
    assert err != ""


def test_image_unparseable_map_is_config_error(tmp_path, capsys):
    t_file = tmp_path / "t.csv"
    g_file = tmp_path / "g.csv"
    t_file.write_text("0.5,abc\n0.1,0.2\n")
    np.savetxt(g_file, np.zeros((2, 2)), delimiter=",")
    code, _, err = run_cli(
        capsys, "image", "--t-map", str(t_file), "--gamma-map", str(g_file),
    )
    assert code == 2


def test_out_file_and_unwritable_path(tmp_path, capsys):
    out_file = tmp_path / "res.csv"
    code, out, _ = run_cli(
        capsys, "probabilities", "--T", "1", "--phi", "0", "--out", str(out_file)
    )
    assert code == 0
    assert out == ""
    assert out_file.read_text().startswith("t,gamma,phi,p_h,p_g\n")
    # writing to a directory path fails with the I/O exit code
    code, _, err = run_cli(
        capsys, "probabilities", "--T", "1", "--phi", "0", "--out", str(tmp_path)
    )
    assert code == 3


def test_config_errors_exit_2(capsys):
    code, _, err = run_cli(capsys, "probabilities", "--T", "1.4", "--phi", "0")
    assert code == 2
    code, _, err = run_cli(capsys, "probabilities", "--T", "0.5", "--shots", "-5")
    assert code == 2
    code, _, err = run_cli(capsys, "sweep", "--T", "0.5", "--phi", "0")
    assert code == 2
    code, _, err = run_cli(
        capsys, "sweep", "--T", "0.5", "--phi", "0,1", "--phi-points", "4"
    )
    assert code == 2


def test_image_per_pixel_failures_exit_nonzero(tmp_path, capsys):
    # a duplicate-phase sweep fails in every pixel; the scan completes,
    # each row carries the failure message, and the exit code is 1
    t_file = tmp_path / "t.csv"
    g_file = tmp_path / "g.csv"
    np.savetxt(t_file, np.full((2, 2), 0.5), delimiter=",")
    np.savetxt(g_file, np.zeros((2, 2)), delimiter=",")
    code, out, _ = run_cli(
        capsys, "image", "--t-map", str(t_file), "--gamma-map", str(g_file),
        "--phi", "0,0", "--method", "two-point",
    )
    assert code == 1
    _, rows = parse_csv(out)
    assert len(rows) == 4
    assert all(r["status"] != "" for r in rows)
    assert all(r["t_hat"] == "" for r in rows)


def test_csv_uses_lf_line_endings(capsys):
    _, out, _ = run_cli(capsys, "probabilities", "--T", "1", "--phi", "0")
    assert "\r" not in out
    assert out.endswith("\n")
