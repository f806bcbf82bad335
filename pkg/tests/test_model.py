import math
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from pvdeflect.model import (ALUMINIUM_6063_T5, TEMPERED_GLASS, ConfigError, MaterialProps,
                             PanelModel, RobotLoad, SimulationConfig, dump_config,
                             flexural_rigidity, load_config, normal_force)

G0 = 9.80665


def test_normal_force_default_robot():
    # 83 kg on a 10 degree incline, evaluated by hand: 83 * 0.984807753 * 9.80665
    F = normal_force(83, 10, G0)
    assert F == pytest.approx(801.586, abs=1e-3)
    assert F / G0 == pytest.approx(81.74, abs=0.01)


@pytest.mark.parametrize("mass, incline", [(0, 0), (0, 37.0), (0, 89.0)])
def test_normal_force_zero_mass(mass, incline):
    assert normal_force(mass, incline, G0) == 0.0


def test_normal_force_vertical_surface():
    assert normal_force(83, 90, G0) == 0.0


@given(st.floats(0, 500), st.floats(0, 89.9), st.floats(0, 89.9))
def test_normal_force_monotone_in_incline(mass, a, b):
    lo, hi = sorted((a, b))
    assert normal_force(mass, hi) <= normal_force(mass, lo) + 1e-12


@given(st.floats(0.1, 500), st.floats(0, 89.9), st.floats(0.1, 10))
def test_normal_force_linear_in_mass(mass, incline, k):
    assert normal_force(k * mass, incline) == pytest.approx(k * normal_force(mass, incline), rel=1e-12)


def test_flexural_rigidity_glass():
    # 73e9 * 0.0035**3 / (12 * (1 - 0.23**2)) = 3129.875 / 11.3652
    assert flexural_rigidity(73e9, 0.0035, 0.23) == pytest.approx(275.39, abs=0.01)


def test_flexural_rigidity_zero_poisson():
    assert flexural_rigidity(70e9, 0.004, 0.0) == pytest.approx(70e9 * 0.004 ** 3 / 12, rel=1e-15)


@given(st.floats(1e9, 2e11), st.floats(1e-3, 0.05), st.floats(0, 0.49))
def test_flexural_rigidity_cubic_in_thickness(E, t, nu):
    ratio = flexural_rigidity(E, 2 * t, nu) / flexural_rigidity(E, t, nu)
    assert abs(ratio - 8.0) / 8.0 < 1e-12


def test_defaults_match_published_tables():
    cfg = load_config("")
    p, r = cfg.panel, cfg.robot
    assert (p.length_mm, p.width_mm, p.frame_depth_mm) == (1956, 992, 40)
    assert p.glass_thickness_mm == 3.5
    assert p.glass == TEMPERED_GLASS == MaterialProps(73e9, 0.23, 2500)
    assert p.frame_material == ALUMINIUM_6063_T5 == MaterialProps(70e9, 0.3, 2700)
    assert (r.mass_kg, r.incline_deg) == (83, 10)
    assert (r.belt_contact_length_mm, r.belt_spacing_mm) == (590, 673)
    assert len(p.clamp_pads) == 4
    assert {pad.center_offset_from_short_edge_mm for pad in p.clamp_pads} == {200, 1756}
    assert {pad.pad_width_mm for pad in p.clamp_pads} == {40}
    assert not p.include_self_weight
    assert r.gravity_m_s2 == G0


def test_minimal_document_equals_defaults():
    assert load_config("[panel]\n") == SimulationConfig()
    assert load_config({}) == SimulationConfig()


def test_poisson_out_of_range_is_invariant_error():
    with pytest.raises(ConfigError, match="poisson_ratio"):
        load_config("[panel.glass]\npoisson_ratio = 0.6\n")


def test_unknown_key_named():
    with pytest.raises(ConfigError, match="panel.lenght_mm"):
        load_config("[panel]\nlenght_mm = 2000\n")


def test_wrong_type_named():
    with pytest.raises(ConfigError, match="robot.mass_kg"):
        load_config('[robot]\nmass_kg = "heavy"\n')


def test_grid_cells_for_10mm():
    cfg = load_config("[mesh]\ntarget_size_mm = 10\n")
    assert cfg.grid_cells() == (196, 100)


def test_mesh_size_must_fit_belt():
    with pytest.raises(ConfigError, match="belt"):
        load_config("[mesh]\ntarget_size_mm = 60\n")


def test_belts_must_fit_panel():
    with pytest.raises(ConfigError, match="panel width"):
        load_config("[robot]\nbelt_spacing_mm = 960\n")


def test_clamp_pad_outside_panel():
    with pytest.raises(ConfigError, match="perimeter"):
        load_config("[[panel.clamp_pads]]\nedge = 'long_near'\n"
                    "center_offset_from_short_edge_mm = 1950\npad_width_mm = 40\n")


def test_force_override():
    cfg = load_config("[robot]\nnormal_force_override_kgf = 81.5\n")
    assert cfg.robot.normal_force_n == pytest.approx(81.5 * G0, rel=1e-15)


def test_roundtrip_idempotent(tmp_path):
    cfg = load_config({"robot": {"normal_force_override_kgf": 81.5},
                       "scenario": {"kind": "single_position", "positions_mm": [[900, 400]]},
                       "output": {"fit_window_mm": [200, 1756]}})
    again = load_config(dump_config(cfg))
    assert again == cfg
    path = tmp_path / "c.toml"
    path.write_text(dump_config(again))
    assert load_config(path) == cfg
    assert load_config(path).digest() == cfg.digest()


def test_types_are_immutable():
    cfg = SimulationConfig()
    with pytest.raises(Exception):
        cfg.panel.length_mm = 3.0
    assert replace(cfg.panel, length_mm=2000).length_mm == 2000


def test_panel_invariants():
    with pytest.raises(ConfigError):
        PanelModel(length_mm=900, width_mm=992, clamp_pads=())
    with pytest.raises(ConfigError):
        RobotLoad(incline_deg=90)
