import os

import pytest

from curvspec import analysis, eigensolve
from curvspec.cli import RunConfig, main, run_analyze, run_report, run_solve

from conftest import CONFIG_DIR


def _cfg(name):
    return os.path.join(CONFIG_DIR, name)


@pytest.fixture(scope="module")
def solved_triangle(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("ri"))
    cfg = RunConfig(
        config_path=_cfg("right_isosceles_dirichlet.yaml"),
        out_dir=out,
        refinements=3,
        num_eigs=6,
        target_h=0.35,
        quiet=True,
    )
    return cfg, run_solve(cfg)


def test_solve_outputs(solved_triangle):
    cfg, res = solved_triangle
    assert os.path.exists(res["spectrum_path"])
    table = open(res["table_path"]).read().splitlines()
    assert table[0].split() == ["Initial", "1", "2", "3", "Predicted", "True"]
    assert len(table) == 7
    spec = eigensolve.read_spectrum_file(res["spectrum_path"])
    assert spec.level_ids == [0, 1, 2, 3]
    assert len(spec.predicted) == 6


def test_solve_refinements_validated():
    with pytest.raises(Exception, match="refinements"):
        RunConfig(config_path="x", out_dir="y", refinements=1)


def test_analyze_flat_emits_six_graphs(solved_triangle, tmp_path):
    cfg, res = solved_triangle
    out = str(tmp_path / "analysis")
    acfg = RunConfig(
        config_path=cfg.config_path,
        out_dir=out,
        quiet=True,
        samples=256,
    )
    run_analyze(acfg, res["spectrum_path"])
    csvs = sorted(f for f in os.listdir(out) if f.startswith("graph") and f.endswith(".csv"))
    svgs = sorted(f for f in os.listdir(out) if f.startswith("graph") and f.endswith(".svg"))
    assert len(csvs) == 6
    assert len(svgs) == 6
    assert os.path.exists(os.path.join(out, "gaps_cdf.csv"))
    assert os.path.exists(os.path.join(out, "gaps_hist.csv"))


def test_analyze_uses_oracle_and_spherical_has_five_graphs(tmp_path):
    out = str(tmp_path / "sph")
    acfg = RunConfig(
        config_path=_cfg("spherical_right_triangle.yaml"),
        out_dir=out,
        quiet=True,
        samples=256,
        num_eigs=200,
        use_oracle=True,
        emit_svg=False,
        emit_gaps=False,
    )
    run_analyze(acfg, spectrum_path=None)
    csvs = sorted(f for f in os.listdir(out) if f.endswith(".csv"))
    assert len(csvs) == 5


def test_analyze_csv_roundtrip(solved_triangle, tmp_path):
    cfg, res = solved_triangle
    out = str(tmp_path / "roundtrip")
    acfg = RunConfig(config_path=cfg.config_path, out_dir=out, quiet=True, samples=256,
                     emit_svg=False, emit_gaps=False)
    result = run_analyze(acfg, res["spectrum_path"])
    for path in result["files"]:
        x, y = analysis.read_graph_csv(path)
        assert len(x) == len(y) > 0


def test_exact_subcommand(tmp_path):
    out = str(tmp_path / "hemi.csv")
    rc = main(["exact", "--case", "hemisphere", "--count", "550", "--out", out])
    assert rc == 0
    spec = eigensolve.read_spectrum_file(out)
    assert len(spec.predicted) == 550
    assert spec.predicted[0] == 2.0

    rc = main(["exact", "--case", "disc-d", "--count", "660", "--out", str(tmp_path / "d.csv")])
    assert rc == 0
    spec = eigensolve.read_spectrum_file(str(tmp_path / "d.csv"))
    assert len(spec.predicted) == 660


def test_exact_unknown_case_exit_code(tmp_path, capsys):
    rc = main(["exact", "--case", "moebius", "--count", "5", "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    assert "moebius" in capsys.readouterr().err


def test_solve_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("space: euclidean\nshape: disc\nradius: -1\n")
    rc = main(["solve", "--config", str(bad), "--out", str(tmp_path / "o"), "--quiet"])
    assert rc == 2
    assert "radius" in capsys.readouterr().err


def test_refinements_precondition_exit_code(tmp_path, capsys):
    rc = main(
        [
            "solve",
            "--config",
            _cfg("right_isosceles_dirichlet.yaml"),
            "--out",
            str(tmp_path / "o"),
            "--refinements",
            "1",
            "--quiet",
        ]
    )
    assert rc == 2
    assert "refinements" in capsys.readouterr().err


def test_gaps_subcommand(tmp_path):
    spectrum = str(tmp_path / "s.csv")
    main(["exact", "--case", "hemisphere", "--count", "60", "--out", spectrum])
    out = str(tmp_path / "gaps")
    rc = main(["gaps", "--spectrum", spectrum, "--out", out, "--bin-width", "1.0", "--quiet"])
    assert rc == 0
    cdf = open(os.path.join(out, "gaps_cdf.csv")).read().splitlines()
    assert cdf[0] == "d,cdf"
    # hemisphere multiplicities put visible mass at zero difference
    first = cdf[1].split(",")
    assert float(first[0]) == 0.0
    assert float(first[1]) > 0.5


def test_end_to_end_determinism(tmp_path):
    outs = []
    for run in range(2):
        out = str(tmp_path / f"run{run}")
        cfg = RunConfig(
            config_path=_cfg("unit_disc_dirichlet.yaml"),
            out_dir=out,
            refinements=2,
            num_eigs=5,
            target_h=0.5,
            samples=128,
            quiet=True,
        )
        run_report(cfg)
        outs.append(out)
    for name in sorted(os.listdir(outs[0])):
        a = open(os.path.join(outs[0], name), "rb").read()
        b = open(os.path.join(outs[1], name), "rb").read()
        assert a == b, f"{name} differs between identical runs"


def test_report_bundles_everything(tmp_path):
    out = str(tmp_path / "report")
    rc = main(
        [
            "report",
            "--config",
            _cfg("hemisphere_dirichlet.yaml"),
            "--out",
            out,
            "--refinements",
            "2",
            "--num-eigs",
            "4",
            "--samples",
            "128",
            "--quiet",
        ]
    )
    assert rc == 0
    files = set(os.listdir(out))
    assert "spectrum.csv" in files
    assert "table.txt" in files
    assert any(f.startswith("graph") and f.endswith(".svg") for f in files)
