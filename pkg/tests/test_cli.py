import json
import os
from pathlib import Path
import subprocess
import sys

import numpy as np
import pytest

from freebound import ConfigError, RunConfig, parse_config
from freebound.cli import EXIT_INVALID, EXIT_NOCONV, EXIT_OK, main
from freebound.config import config_from_text

MINIMAL = """\
D = 1.0
beta = 1.0
b = 1.0
flux = constant
flux_params = 0
u0 = constant
"""

GENERIC = """\
[problem]
D = 1.0
beta = 1.0
b = 1.0
flux = linear            # g = 0.05 (1 + t)
flux_params = 0.05, 0.05
u0 = quadratic
[solver]
N = 32
sigma = 0.02
"""


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_minimal_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, MINIMAL))
    default = RunConfig(D=1.0, beta=1.0, b=1.0, flux_params=(0.0,))
    for name in ("N", "Ny", "tol", "tol_outer", "max_iter", "max_outer", "relax", "C1", "sigma", "T", "Nx",
                 "safety", "mode", "jump"):
        assert getattr(cfg, name) == getattr(default, name)
    assert (cfg.N, cfg.Ny, cfg.tol, cfg.tol_outer, cfg.relax) == (256, 65, 1e-10, 1e-8, 1.0)


def test_diffusivity_rejected(tmp_path):
    with pytest.raises(ConfigError, match="0<D<2") as info:
        parse_config(write(tmp_path, MINIMAL.replace("D = 1.0", "D = 3")))
    assert info.value.lineno == 1


def test_unknown_key_named():
    with pytest.raises(ConfigError, match="gamma"):
        config_from_text(MINIMAL + "gamma = 2\n")


def test_malformed_line_number():
    with pytest.raises(ConfigError) as info:
        config_from_text(MINIMAL + "\nthis line has no equals sign\n")
    assert info.value.lineno == 8
    with pytest.raises(ConfigError) as info:
        config_from_text(MINIMAL + "N = many\n")
    assert info.value.lineno == 7 and "N" in str(info.value)


@pytest.mark.parametrize(
    "extra,needle",
    [("relax = 2", "relax"), ("flux_params = 1, 2", "flux"), ("u0 = wavy", "u0"), ("Ny = -3", "Ny"),
     ("u0 = table\nu0_table = missing.txt", "missing"), ("[numerics]\nN = 8", "numerics")],
)
def test_invalid_values(extra, needle):
    with pytest.raises(ConfigError, match=needle):
        config_from_text(MINIMAL.replace("u0 = constant\n", "") + extra + "\n")


def test_table_paths_resolve_against_config(tmp_path):
    (tmp_path / "u0.txt").write_text("0 1.5\n0.5 1.3\n1 1\n")
    cfg = parse_config(write(tmp_path, MINIMAL.replace("u0 = constant", "u0 = table\nu0_table = u0.txt")))
    assert Path(cfg.u0_table) == tmp_path / "u0.txt"
    assert cfg.build_problem().u0.u[0] == 1.5


def run(args):
    return main([str(a) for a in args] + ["-q"])


def read_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def test_constants_only(tmp_path):
    out = tmp_path / "c"
    assert run(["constants", write(tmp_path, GENERIC), "--out", out]) == EXIT_OK
    assert (out / "constants.csv").exists() and (out / "summary.json").exists()
    assert not (out / "densities.csv").exists()
    text = (out / "constants.csv").read_text().splitlines()
    assert text[0] == "name,value [-]"
    assert any(line.startswith("sigma_star,") for line in text)


def test_validate_only(tmp_path):
    out = tmp_path / "v"
    assert run(["validate", write(tmp_path, GENERIC), "--out", out]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert all(c["passed"] for c in summary["validation"].values())
    bad = write(tmp_path, GENERIC.replace("u0 = quadratic", "u0 = constant"), "bad.cfg")
    assert run(["solve", bad, "--out", tmp_path / "b"]) == EXIT_INVALID
    assert json.loads((tmp_path / "b" / "summary.json").read_text())["status"] == "invalid"


def test_bad_config_exit_code(tmp_path, capsys):
    assert run(["solve", write(tmp_path, MINIMAL.replace("D = 1.0", "D = 3"))]) == EXIT_INVALID
    assert "0<D<2" in capsys.readouterr().err
    assert run(["solve", write(tmp_path, MINIMAL), "--grid", "4"]) == EXIT_INVALID


def test_trivial_front(tmp_path):
    out = tmp_path / "t"
    assert run(["solve", write(tmp_path, MINIMAL), "--out", out, "--sigma", "0.1", "--grid", "16"]) == EXIT_OK
    front = read_csv(out / "front.csv")
    np.testing.assert_allclose(front[:, 1], 1.0 + front[:, 0], rtol=1e-6)
    for name in ("densities", "boundaries", "solution", "residuals"):
        with open(out / f"{name}.csv") as fh:
            assert "[-]" in fh.readline()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["exit_code"] == 0 and summary["warnings"]


def test_compare_mode_and_extension(tmp_path):
    out = tmp_path / "cmp"
    cfg = write(tmp_path, GENERIC + "T = 0.04\n")
    assert run(["compare", cfg, "--out", out]) == EXIT_OK
    cmp = read_csv(out / "comparison.csv")
    assert cmp.shape[1] == 5
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["segments"]) == 2
    assert summary["comparison"]["s_rel_sup"] <= 0.02
    bnd = read_csv(out / "boundaries.csv")
    assert np.all(np.diff(bnd[:, 0]) > 0) and bnd[-1, 0] == pytest.approx(0.04)


def test_no_convergence_keeps_partial_output(tmp_path):
    cfg = write(tmp_path, GENERIC + "max_outer = 1\ntol_outer = 1e-14\n")
    out = tmp_path / "nc"
    assert run(["solve", cfg, "--out", out]) == EXIT_NOCONV
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "no-convergence" and summary["no_convergence"]["history"]
    assert (out / "densities.csv").exists()


def test_deterministic_output(tmp_path):
    cfg = write(tmp_path, GENERIC)
    for d in ("a", "b"):
        assert run(["solve", cfg, "--out", tmp_path / d]) == EXIT_OK
    for name in ("constants", "densities", "boundaries", "solution", "front", "residuals"):
        assert (tmp_path / "a" / f"{name}.csv").read_bytes() == (tmp_path / "b" / f"{name}.csv").read_bytes()


def test_module_entry_point(tmp_path):
    env = dict(os.environ, FBP_THREADS="1")
    proc = subprocess.run([sys.executable, "-m", "freebound", "validate", str(write(tmp_path, MINIMAL)),
                           "--out", str(tmp_path / "m")], capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert "0<D<2" in proc.stderr
