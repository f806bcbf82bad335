import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pvdeflect.loading import (DegenerateSweepError, Footprint, belt_footprints, belt_centerlines,
                               inner_belt_y, nodal_forces, self_weight_forces, sweep_positions)
from pvdeflect.mesh import PlateMesh, build_grid
from pvdeflect.model import PanelModel, RobotLoad, Scenario
from pvdeflect.plate_fem import shape_functions

PANEL = PanelModel()
ROBOT = RobotLoad()
MESH = build_grid(PANEL, 10.0)


def test_default_normal_force():
    assert ROBOT.normal_force_n == pytest.approx(83 * 9.80665 * math.cos(math.radians(10)), rel=1e-14)
    assert ROBOT.normal_force_n == pytest.approx(801.586, abs=1e-3)


def test_footprint_pressure_and_full_force():
    (a, b), total = belt_footprints(ROBOT, PANEL, 1000.0, 496.0)
    assert a.pressure == b.pressure == pytest.approx(ROBOT.normal_force_n / (2 * 590 * 50), rel=1e-14)
    assert total == pytest.approx(ROBOT.normal_force_n, rel=1e-14)
    assert (a.y_min, a.y_max) == (134.5, 184.5)
    assert (b.y_min, b.y_max) == (807.5, 857.5)


def test_half_overlap_carries_half_force():
    _, total = belt_footprints(ROBOT, PANEL, 0.0, 496.0)
    assert total == 0.5 * ROBOT.normal_force_n
    _, total = belt_footprints(ROBOT, PANEL, PANEL.length_mm, 496.0)
    assert total == 0.5 * ROBOT.normal_force_n


def test_off_panel_carries_nothing():
    prints, total = belt_footprints(ROBOT, PANEL, -400.0, 496.0)
    assert total == 0.0 and all(p.empty for p in prints)
    assert not nodal_forces(MESH, prints).any()


def test_lateral_clipping():
    # outer belt half off the y = 0 edge
    (a, _), total = belt_footprints(ROBOT, PANEL, 1000.0, 336.5)
    assert (a.y_min, a.y_max) == (0.0, 25.0)
    assert total == pytest.approx(0.75 * ROBOT.normal_force_n, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.floats(-300, 2250), st.floats(300, 700))
def test_nodal_force_conservation(cx, cy):
    prints, total = belt_footprints(ROBOT, PANEL, cx, cy)
    f = nodal_forces(MESH, prints)
    if total == 0:
        assert not f.any()
    else:
        assert abs(f[0::3].sum() - total) <= 1e-9 * total


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 60), st.floats(0, 60), st.floats(1, 60), st.floats(1, 60))
def test_consistent_loads_reproduce_first_moments(x0, y0, w, h):
    mesh = PlateMesh(9, 7, 90.0, 70.0)
    fp = Footprint(x0, min(x0 + w, 90.0), y0, min(y0 + h, 70.0), 0.01)
    f = nodal_forces(mesh, [fp])
    x, y = mesh.coords[:, 0], mesh.coords[:, 1]
    # virtual work against rigid tilts w = x (theta_y = -1) and w = y (theta_x = 1)
    mx = f[0::3] @ x - f[2::3].sum()
    my = f[0::3] @ y + f[1::3].sum()
    cx, cy = 0.5 * (fp.x_min + fp.x_max), 0.5 * (fp.y_min + fp.y_max)
    assert mx == pytest.approx(fp.force * cx, rel=1e-10, abs=1e-12)
    assert my == pytest.approx(fp.force * cy, rel=1e-10, abs=1e-12)


def test_half_element_against_quadrature():
    mesh = PlateMesh(2, 2, 20.0, 16.0)
    fp = Footprint(5.0, 10.0, 0.0, 8.0, 0.3)  # right half of element 0
    f = nodal_forces(mesh, [fp])
    g, wts = np.polynomial.legendre.leggauss(6)
    s = 0.5 + 0.25 * (g + 1)  # s in [0.5, 1]
    t = 0.5 * (g + 1)
    S, T = np.meshgrid(s, t, indexing="ij")
    W = np.outer(wts, wts) * (0.25 * 10.0) * (0.5 * 8.0)
    N = shape_functions(10.0, 8.0, S.ravel(), T.ravel())
    expected = 0.3 * (W.ravel() @ N)
    got = f[mesh.element_dofs[0]]
    assert np.allclose(got, expected, rtol=1e-12, atol=1e-14)
    others = np.setdiff1d(np.arange(mesh.n_dofs), mesh.element_dofs[0])
    assert not f[others].any()


def test_translation_by_whole_cells():
    mesh = PlateMesh(20, 10, 200.0, 100.0)
    f1 = nodal_forces(mesh, [Footprint(33.0, 71.0, 12.0, 47.0, 1.0)])
    f2 = nodal_forces(mesh, [Footprint(53.0, 91.0, 22.0, 57.0, 1.0)])
    g1 = f1.reshape(11, 21, 3)
    g2 = f2.reshape(11, 21, 3)
    assert np.abs(g2[1:, 2:] - g1[:-1, :-2]).max() <= 1e-12 * np.abs(g1).max()


def test_reflection_symmetry():
    mesh = PlateMesh(20, 10, 200.0, 100.0)
    f = nodal_forces(mesh, [Footprint(60.0, 140.0, 10.0, 40.0, 1.0)]).reshape(11, 21, 3)
    # theta_y = -dw/dx changes sign under x -> -x
    mirrored = f[:, ::-1] * np.array([1.0, 1.0, -1.0])
    assert np.abs(f - mirrored).max() <= 1e-12 * np.abs(f).max()


def test_loads_only_on_touched_elements():
    fp = Footprint(100.0, 130.0, 200.0, 260.0, 1.0)
    f = nodal_forces(MESH, [fp])
    nodes = np.nonzero(np.abs(f.reshape(-1, 3)).sum(axis=1))[0]
    xy = MESH.coords[nodes]
    assert xy[:, 0].min() >= 100.0 - MESH.dx and xy[:, 0].max() <= 130.0 + MESH.dx
    assert xy[:, 1].min() >= 200.0 - MESH.dy and xy[:, 1].max() <= 260.0 + MESH.dy


def test_self_weight_total():
    f = self_weight_forces(MESH, PANEL, 9.80665, 0.0)
    glass = 2500 * 9.80665 * 3.5e-3 * 1.956 * 0.992
    perimeter = 2 * (1956.0 + 992.0)
    frame = 2700 * 9.80665 * 180e-6 * perimeter * 1e-3
    assert f[0::3].sum() == pytest.approx(glass + frame, rel=1e-12)


def test_belt_centerlines_and_inner_belt():
    assert belt_centerlines(ROBOT, 361.5) == (25.0, 698.0)
    assert inner_belt_y(ROBOT, PANEL, 361.5) == 698.0
    # symmetric about the centreline: tie goes to the lower y
    assert inner_belt_y(ROBOT, PANEL, 496.0) == 159.5


def test_default_side_sweep_positions():
    pos = sweep_positions(Scenario(), PANEL, ROBOT)
    assert [x for x, _ in pos] == [295.0 + 120.0 * i for i in range(10)]
    assert pos[-1][0] == 1375.0
    assert {y for _, y in pos} == {361.5}


def test_central_sweep_positions():
    pos = sweep_positions(Scenario(kind="central_linear"), PANEL, ROBOT)
    assert {y for _, y in pos} == {496.0}
    assert len(pos) == 10


def test_lateral_offset_shifts_side_sweep():
    pos = sweep_positions(Scenario(lateral_offset_mm=20.0), PANEL, ROBOT)
    assert pos[0][1] == 381.5


def test_single_count_sweep():
    assert sweep_positions(Scenario(count=1), PANEL, ROBOT) == [(295.0, 361.5)]


def test_single_position_scenario():
    sc = Scenario(kind="single_position", positions_mm=((500.0, 400.0), (900.0, 496.0)))
    assert sweep_positions(sc, PANEL, ROBOT) == [(500.0, 400.0), (900.0, 496.0)]


def test_degenerate_sweep():
    with pytest.raises(DegenerateSweepError):
        sweep_positions(Scenario(start_mm=3000.0, count=3), PANEL, ROBOT)
    # one position touching the panel is enough
    assert len(sweep_positions(Scenario(start_mm=-400.0, step_mm=300.0, count=3), PANEL, ROBOT)) == 3
