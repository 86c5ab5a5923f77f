import math

import pytest

from omfields import ValidationError
from omfields.config import build, load, load_entries, parse_assignment, read_entries

BASE = """\
omega_m_over_2pi_hz = 1.094e9
gamma_m_over_2pi_hz = 16.8e3
gamma_a0_over_2pi_hz = 0.204e9
gamma_ae_over_2pi_hz = 0.051e9
Delta_over_2pi_hz = 1.094e9
delta_over_2pi_hz = 1.094e9
G_over_2pi_hz = 1.5e6
"""


def test_suffix_converts_once():
    assert parse_assignment("omega_m_over_2pi_hz = 1.094e9", "x") == ("omega_m", 2 * math.pi * 1.094e9)
    assert parse_assignment("omega_m = 5.0", "x") == ("omega_m", 5.0)


@pytest.mark.parametrize(
    "text, value",
    [("pi", math.pi), ("-pi", -math.pi), ("pi/2", math.pi / 2), ("-pi/4", -math.pi / 4),
     ("0.5*pi", 0.5 * math.pi), ("2 * pi", 2 * math.pi), ("1.25", 1.25)],
)
def test_phase_forms(text, value):
    assert parse_assignment(f"phi = {text}", "x")[1] == pytest.approx(value)


def test_comments_and_blank_lines():
    entries = read_entries("# header\n\neta = 0.5  # trailing\n")
    assert entries == {"eta": 0.5}


def test_unknown_key_reports_line():
    with pytest.raises(ValidationError, match=r"cfg:3: unknown key 'Gamma'"):
        read_entries("eta = 0\n\nGamma = 1\n", "cfg")


def test_suffix_only_on_frequencies():
    with pytest.raises(ValidationError, match="unknown key 'eta_over_2pi_hz'"):
        parse_assignment("eta_over_2pi_hz = 1", "x")


def test_duplicate_key():
    with pytest.raises(ValidationError, match="already set at cfg:1"):
        read_entries("eta = 0\neta = 1\n", "cfg")


def test_bad_number():
    with pytest.raises(ValidationError, match="cfg:1"):
        read_entries("eta = lots\n", "cfg")


def test_missing_required_parameter():
    with pytest.raises(ValidationError, match="'gamma_m'"):
        build(read_entries("omega_m = 1\n"))


def test_malformed_grid_reports_line():
    text = BASE + "axes = eta\neta_start = 0\neta_stop = 1\neta_count = 1\n"
    with pytest.raises(ValidationError, match=r"cfg:11: malformed grid"):
        build(read_entries(text, "cfg"))


def test_unknown_axis_and_observable():
    with pytest.raises(ValidationError, match="unknown axis"):
        build(read_entries(BASE + "axes = kappa\n"))
    with pytest.raises(ValidationError, match="unknown observable"):
        build(read_entries(BASE + "observables = t_x_sq\n"))


def test_eta_phi_map_onto_drive():
    cfg = build(read_entries(BASE + "eta = 0.01\nphi = pi\nphi_m = 0.5\n"))
    assert cfg.drive.eta == pytest.approx(0.01)
    assert cfg.drive.phi == pytest.approx(math.pi)
    assert cfg.drive.phi_m == 0.5


def test_eta_conflicts_with_eps_m():
    with pytest.raises(ValidationError, match="conflicts"):
        build(read_entries(BASE + "eta = 0.01\neps_m = 1e-5\n"))


def test_validation_violations_surface():
    with pytest.raises(ValidationError, match="rates strictly positive"):
        load(None, BASE.splitlines() + ["gamma_m = 0"])


def test_overrides_replace_file_values(tmp_path):
    path = tmp_path / "x.cfg"
    path.write_text(BASE)
    entries = load_entries(path, ["G_over_2pi_hz = 2e6"])
    assert entries["G"] == pytest.approx(2 * math.pi * 2e6)
    assert entries.where["G"] == "--set #1"


def test_bundled_configs_resolve():
    cfg = load("paper_base.cfg")
    assert cfg.params.omega_m == pytest.approx(2 * math.pi * 1.094e9)
    assert cfg.G == pytest.approx(2 * math.pi * 1.5e6)


def test_delta_defaults_for_detuning_axes():
    text = BASE.replace("delta_over_2pi_hz = 1.094e9\n", "") + "axes = delta\ndelta_values = 1, 2\n"
    cfg = build(read_entries(text))
    assert cfg.drive.delta == cfg.params.omega_m
    assert cfg.axes[0].values == (1.0, 2.0)


def test_bare_mode():
    text = """\
mode = bare
omega_m = 10
gamma_m = 0.01
gamma_a0 = 0.5
gamma_ae = 0.5
g = 0.1
Delta_a = 10
eps_c = 3
delta = 10
"""
    cfg = build(read_entries(text))
    y = cfg.drive.Delta - 10
    K = 0.1**2 * 9 / 10
    assert abs(y * (1 + (10 + y) ** 2) + K) < 1e-12
    assert cfg.G == pytest.approx(0.1 * 3 / (1 + 1j * cfg.drive.Delta))


def test_bistable_config_needs_branch():
    text = "mode = bare\nomega_m = 10\ngamma_m = 0.01\ngamma_a0 = 0.5\ngamma_ae = 0.5\n" \
           "g = 1\nDelta_a = 5\neps_c = 7.745966692414834\ndelta = 10\n"
    from omfields import BistableAmbiguity

    with pytest.raises(BistableAmbiguity):
        build(read_entries(text))
    assert 4.0 < build(read_entries(text + "branch = 2\n")).drive.Delta < 5.0
