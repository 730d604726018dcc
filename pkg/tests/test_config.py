from pathlib import Path

import pytest

from permeaflow.config import ParseError, dump_config, load_config, parse_config
from permeaflow.experiments import CaseKind
from permeaflow.scheme import Step3Mode


def test_minimal_two_interface_defaults():
    rc = parse_config("[TwoInterface1D]\n")
    assert rc.case.kind is CaseKind.TWO_INTERFACE_1D
    p = rc.case.params
    assert (p.K, p.D_plus, p.D_minus, p.epsilon) == (0.2, 1.0, 1.0, 0.01)
    assert rc.solver.dt == rc.case.dt


def test_convergence_fraction_keys():
    rc = parse_config("[Convergence2D]\nh = 1/64\ndt = 1e-4\n")
    assert (rc.case.grid.nx, rc.case.grid.ny) == (64, 64)
    assert rc.case.dt == 1e-4


def test_negative_reynolds_reports_line_and_key():
    with pytest.raises(ParseError) as info:
        parse_config("[ShearDrop]\nRe = -1\n")
    assert info.value.line == 2 and info.value.key == "Re"
    assert "positive" in str(info.value)


def test_unknown_key_rejected():
    with pytest.raises(ParseError) as info:
        parse_config("[ShearDrop]\n# comment\nviscosity = 2\n")
    assert info.value.line == 3 and info.value.key == "viscosity"


@pytest.mark.parametrize("text", [
    "[ShearDrop]\nK = abc\n",
    "[ShearDrop]\nnx = 1.5\n",
    "[Nonsense]\n",
    "[ShearDrop]\n[TwoDroplets]\n",
    "no section\n",
    "[ShearDrop]\n[run]\nlevels = 16, 24\n",
    "[ShearDrop]\n[solver]\nlin_tol = 2\n",
])
def test_malformed_documents(text):
    with pytest.raises(ParseError):
        parse_config(text)


def test_solver_and_run_sections(tmp_path):
    text = ("[ShearDrop]\nM = 0.05\nn = 32\n\n[solver]\nstep3_mode = linearized\nlinear_solver = direct\n"
            "[run]\nout = results\nlevels = 16, 32\nepsilons = 0.04, 0.02\n")
    rc = parse_config(text)
    assert rc.case.params.mobility == 0.05 and rc.case.grid.nx == 32
    assert rc.solver.step3_mode is Step3Mode.LINEARIZED and rc.solver.linear_solver == "direct"
    assert rc.out_dir == "results" and rc.levels == (16, 32) and rc.epsilons == (0.04, 0.02)
    path = tmp_path / "case.ini"
    path.write_text(text)
    assert load_config(path) == rc


@pytest.mark.parametrize("kind", [k.value for k in CaseKind])
def test_round_trip(kind):
    rc = parse_config(f"[{kind}]\n")
    again = parse_config(dump_config(rc))
    assert again == rc
    assert dump_config(again) == dump_config(rc)


def test_options_round_trip():
    rc = parse_config("[TwoDroplets]\ncenters = 0.4, 0.6; 1.4, 0.4\nradius = 0.15\n")
    assert rc.case.option("centers") == ((0.4, 0.6), (1.4, 0.4))
    assert parse_config(dump_config(rc)) == rc


@pytest.mark.parametrize("path", sorted((Path(__file__).parents[1] / "configs").glob("*.ini")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    assert load_config(path).case.kind.value in path.read_text()
