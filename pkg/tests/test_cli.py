import json
import math

import numpy as np
import pytest

from gpegap.cli import (
    CSV_HEADER,
    EXIT_CONFIG,
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    EXIT_PARTIAL,
    RunConfig,
    main,
)
from gpegap.fieldio import load_field

PI = math.pi


def test_runconfig_roundtrip():
    cfg = RunConfig(bc="periodic", lengths=(1.0,), beta=(0.0, 1.0, 10.0),
                    n=(256,), excited="plane-wave", tau=0.005, seed=3)
    text = cfg.to_text()
    back = RunConfig.from_text(text)
    assert back == cfg
    # and a second serialization round is identical
    assert back.to_text() == text


def test_runconfig_rejects_unknown_key():
    with pytest.raises(ValueError):
        RunConfig.from_text("no_such_key = 1\n")
    with pytest.raises(ValueError):
        RunConfig.from_text("just a line without equals\n")


def test_config_file_with_flag_override(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("bc = periodic\nlengths = 1\nbeta = 5\nn = 256\n")
    out = tmp_path / "rep.json"
    code = main(["solve", "--config", str(cfgfile), "--beta", "10", "--out", str(out)])
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["beta"] == 10.0  # flag wins over config file
    assert payload["E"] == pytest.approx(5.0, abs=1e-9)
    assert payload["mu"] == pytest.approx(10.0, abs=1e-9)


def test_solve_writes_field_binary(tmp_path):
    out = tmp_path / "rep.json"
    field = tmp_path / "phi.bin"
    code = main([
        "solve", "--bc", "dirichlet", "--lengths", "2", "--beta", "0",
        "--n", "512", "--out", str(out), "--field-out", str(field),
    ])
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["E"] == pytest.approx(PI**2 / 8, abs=5e-4)
    phi, grid, beta = load_field(field)
    assert beta == 0.0
    assert phi.shape == (512,)
    assert abs(grid.norm(phi) - 1.0) < 1e-12


def test_solve_vortex_complex_export(tmp_path):
    out = tmp_path / "rep.json"
    field = tmp_path / "phi.bin"
    code = main([
        "solve", "--bc", "dirichlet", "--lengths", "1", "1", "--beta", "10",
        "--n", "32", "32", "--excited", "vortex",
        "--out", str(out), "--field-out", str(field),
    ])
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["winding"] == 1
    phi, _, _ = load_field(field)
    assert np.iscomplexobj(phi)


def test_config_error_exit_code(tmp_path, capsys):
    code = main(["solve", "--bc", "dirichlet", "--beta", "1"])  # missing lengths
    assert code == EXIT_CONFIG
    code = main(["solve", "--config", str(tmp_path / "missing.cfg")])
    assert code == EXIT_CONFIG


def test_convergence_failure_exit_code(tmp_path):
    out = tmp_path / "rep.json"
    code = main([
        "solve", "--bc", "dirichlet", "--lengths", "2", "--beta", "50",
        "--n", "128", "--max-iter", "2", "--out", str(out),
    ])
    assert code == EXIT_NOT_CONVERGED
    assert json.loads(out.read_text())["status"] == "not_converged"


def test_gap_sweep_periodic_csv_and_conjecture(tmp_path):
    csv = tmp_path / "curve.csv"
    js = tmp_path / "conj.json"
    args = [
        "gap-sweep", "--bc", "periodic", "--lengths", "1", "--n", "16384",
        "--beta", "0", "1", "10", "100",
        "--csv-out", str(csv), "--json-out", str(js), "--margin-tol", "1e-6",
    ]
    code = main(args)
    assert code == EXIT_OK
    lines = csv.read_text().splitlines()
    assert lines[0] == CSV_HEADER  # golden header, stable column order
    assert len(lines) == 5
    for line in lines[1:]:
        cells = line.split(",")
        assert cells[-1] == "ok"
        delta_e = float(cells[5])
        assert delta_e == pytest.approx(2 * PI**2, abs=1e-6)
        assert float(cells[6]) == pytest.approx(2 * PI**2, abs=1e-6)
    payload = json.loads(js.read_text())
    assert payload["conjecture"]["family"] == "periodic"
    assert payload["conjecture"]["violations"] == []
    assert payload["conjecture"]["monotonicity_delta_E"] in ("constant", "neither")
    # byte-identical reruns (CSV and JSON)
    first_csv = csv.read_bytes()
    first_json = js.read_bytes()
    code = main(args)
    assert code == EXIT_OK
    assert csv.read_bytes() == first_csv
    assert js.read_bytes() == first_json


def test_gap_sweep_parallel_jobs(tmp_path):
    csv = tmp_path / "curve.csv"
    code = main([
        "gap-sweep", "--bc", "periodic", "--lengths", "1", "--n", "1024",
        "--beta", "0", "1", "10", "--jobs", "2", "--csv-out", str(csv),
    ])
    assert code == EXIT_OK
    lines = csv.read_text().splitlines()
    assert len(lines) == 4
    betas = [float(line.split(",")[0]) for line in lines[1:]]
    assert betas == [0.0, 1.0, 10.0]  # output ordered by beta


def test_gap_sweep_rejects_unsorted(tmp_path):
    code = main([
        "gap-sweep", "--bc", "periodic", "--lengths", "1", "--n", "256",
        "--beta", "10", "0", "--csv-out", str(tmp_path / "x.csv"),
    ])
    assert code == EXIT_CONFIG


def test_gap_sweep_partial_failure_exit(tmp_path):
    csv = tmp_path / "curve.csv"
    code = main([
        "gap-sweep", "--bc", "dirichlet", "--lengths", "2", "--n", "128",
        "--beta", "0", "40", "--max-iter", "3",
        "--csv-out", str(csv),
    ])
    assert code == EXIT_PARTIAL
    lines = csv.read_text().splitlines()
    assert any(line.endswith(",failed") for line in lines[1:])


def test_gap_sweep_refuses_asymmetric_excited(tmp_path):
    code = main([
        "gap-sweep", "--bc", "dirichlet", "--lengths", "2", "--n", "128",
        "--potential", "nonconvex-sine", "--beta", "0", "1",
        "--csv-out", str(tmp_path / "x.csv"),
    ])
    assert code == EXIT_CONFIG  # no symmetry-protected branch; must opt in to scf


def test_gap_sweep_nonconvex_scf(tmp_path):
    csv = tmp_path / "curve.csv"
    js = tmp_path / "conj.json"
    code = main([
        "gap-sweep", "--bc", "dirichlet", "--lengths", "2", "--n", "256",
        "--potential", "nonconvex-neg-quadratic", "--excited", "scf",
        "--beta", "0", "1", "--csv-out", str(csv), "--json-out", str(js),
    ])
    assert code == EXIT_OK
    payload = json.loads(js.read_text())
    assert payload["conjecture"]["applicable"] is False


def test_tabulated_potential_from_file(tmp_path):
    import numpy as np

    pot = tmp_path / "pot.txt"
    np.savetxt(pot, np.zeros(64))  # zero potential, tabulated form
    out = tmp_path / "rep.json"
    code = main([
        "solve", "--bc", "dirichlet", "--lengths", "2", "--n", "64",
        "--potential", "file", "--potential-file", str(pot),
        "--beta", "0", "--out", str(out),
    ])
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["E"] == pytest.approx(PI**2 / 8, abs=5e-3)


def test_asym_command_values(capsys):
    code = main(["asym", "box", "--lengths", "2", "--beta", "1000", "--regime", "strong"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if l.startswith("E_g"))
    assert float(line.split()[1]) == pytest.approx(265.407, abs=5e-3)


def test_asym_higher_order(capsys):
    code = main(["asym", "harmonic", "--gamma", "1", "--beta", "100",
                 "--regime", "strong", "--higher-order"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if l.startswith("delta_E"))
    assert float(line.split()[1]) == pytest.approx(0.73368, abs=1e-5)


def test_asym_periodic_exact_tag(capsys):
    code = main(["asym", "periodic", "--lengths", "1", "--beta", "42"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if l.startswith("delta_E"))
    assert float(line.split()[1]) == pytest.approx(19.739209, abs=1e-6)
    assert "exact" in line


def test_asym_refuses_extrapolation_without_force(capsys):
    code = main(["asym", "box", "--lengths", "2", "--beta", "0.5", "--regime", "strong"])
    assert code == EXIT_CONFIG
    code = main(["asym", "box", "--lengths", "2", "--beta", "0.5",
                 "--regime", "strong", "--force"])
    assert code == EXIT_OK


def test_figure_recipe_periodic(tmp_path):
    outdir = tmp_path / "fig"
    code = main(["figure", "--recipe", "periodic-gaps", "--outdir", str(outdir)])
    assert code == EXIT_OK
    manifest = (outdir / "manifest.txt").read_text().splitlines()
    names = [line.split()[0] for line in manifest]
    assert "numeric_delta_E" in names and "bound_delta_E" in names
    for line in manifest:
        name, fname = line.split()
        data = np.loadtxt(outdir / fname)
        assert data.shape[1] == 2
    series = np.loadtxt(outdir / "numeric_delta_E.dat")
    assert np.allclose(series[:, 1], 2 * PI**2, atol=1e-6)


def test_figure_unknown_recipe(tmp_path):
    code = main(["figure", "--recipe", "no-such", "--outdir", str(tmp_path)])
    assert code == EXIT_CONFIG


def test_figure_recipe_box_1d_content(tmp_path):
    outdir = tmp_path / "box1d"
    code = main(["figure", "--recipe", "box-1d-gaps", "--outdir", str(outdir)])
    assert code == EXIT_OK
    numeric = np.loadtxt(outdir / "numeric_delta_E.dat")
    assert numeric[0, 1] == pytest.approx(3 * PI**2 / 8, abs=5e-4)
    strong = np.loadtxt(outdir / "strong_delta_E.dat")
    i = int(np.argmin(np.abs(numeric[:, 0] - strong[-1, 0])))
    assert numeric[i, 1] == pytest.approx(strong[-1, 1], rel=0.02)
    bound = np.loadtxt(outdir / "bound_delta_E.dat")
    assert np.allclose(bound[:, 1], 3 * PI**2 / 8)


def test_figure_recipe_harmonic_content(tmp_path):
    outdir = tmp_path / "har1d"
    code = main(["figure", "--recipe", "harmonic-1d-gaps", "--outdir", str(outdir)])
    assert code == EXIT_OK
    numeric = np.loadtxt(outdir / "numeric_delta_E.dat")
    # decreasing curve whose tail approaches sqrt(2)/2
    assert np.all(np.diff(numeric[:, 1]) < 0)
    assert numeric[-1, 1] == pytest.approx(math.sqrt(2) / 2, abs=0.02)


def test_figure_recipe_neumann_content(tmp_path):
    outdir = tmp_path / "neumann1d"
    code = main(["figure", "--recipe", "neumann-1d-gaps", "--outdir", str(outdir)])
    assert code == EXIT_OK
    numeric = np.loadtxt(outdir / "numeric_delta_mu.dat")
    assert numeric[0, 1] == pytest.approx(PI**2 / 8, abs=5e-4)
    # strong tail tracks the strong branch
    assert numeric[-1, 0] == 1000.0
    assert numeric[-1, 1] == pytest.approx(22.861, rel=0.02)
