"""Scenario files: schema checks, builders, bundled catalogue."""

import numpy as np
import pytest
from conftest import toy_config

from coopman.errors import ScenarioError
from coopman.sim.runner import simulate
from coopman.sim.scenario import (build_controller, build_plant,
                                  build_reference, build_run,
                                  bundled_scenarios, load_scenario)


def test_bundled_catalogue():
    names = bundled_scenarios()
    for expected in ("planar_duo_ppc", "planar_duo_adaptive",
                     "quad_arm_adaptive", "quad_arm_ppc",
                     "quad_arm_ppc_untuned"):
        assert expected in names


def test_load_by_name_and_by_path(tmp_path):
    cfg = load_scenario("planar_duo_ppc")
    assert cfg["name"] == "planar_duo_ppc"
    f = toy_config(tmp_path, lambda s: s.replace('name = "toy"\n', ""))
    cfg = load_scenario(f)
    # nameless files inherit their stem
    assert cfg["name"] == "toy"


def test_unknown_names_and_bad_files(tmp_path):
    with pytest.raises(ScenarioError, match="planar_duo_ppc"):
        load_scenario("does_not_exist")
    bad = tmp_path / "bad.toml"
    bad.write_text("= this is not toml")
    with pytest.raises(ScenarioError, match="TOML"):
        load_scenario(bad)


def test_unknown_keys_rejected(tmp_path):
    with pytest.raises(ScenarioError, match="typo"):
        load_scenario(toy_config(tmp_path, lambda s: s + "\ntypo = 1\n"))
    with pytest.raises(ScenarioError, match="controller.funnel.bogus"):
        load_scenario(toy_config(
            tmp_path,
            lambda s: s.replace("pose_gain = 0.05",
                                "pose_gain = 0.05\nbogus = 2")))
    with pytest.raises(ScenarioError, match="must be a table"):
        load_scenario(toy_config(
            tmp_path,
            lambda s: s.replace('name = "toy"', 'name = "toy"\ninitial = 5')
                       .replace("[initial]\npose = [0.3, 0.0, 0.15, "
                                "0.0, 0.0, 0.0]\n", "")))


def test_missing_required_key(tmp_path):
    cfg = load_scenario(toy_config(tmp_path))
    del cfg["grasp"]
    with pytest.raises(ScenarioError, match="missing 'grasp'"):
        build_plant(cfg)
    cfg = load_scenario(toy_config(tmp_path))
    del cfg["team"]["planar"]["bases"]
    with pytest.raises(ScenarioError, match="team.planar.bases"):
        build_plant(cfg)


def test_team_section_exclusive(tmp_path):
    cfg = load_scenario(toy_config(tmp_path))
    cfg["team"]["effector"] = {}
    with pytest.raises(ScenarioError, match="exactly one"):
        build_plant(cfg)
    del cfg["team"]["planar"], cfg["team"]["effector"]
    with pytest.raises(ScenarioError, match="exactly one"):
        build_plant(cfg)


def test_agent_count_must_match_grasp(tmp_path):
    cfg = load_scenario(toy_config(tmp_path))
    arm = cfg["team"]["planar"]
    arm["lengths"] = [[0.15] * 3] * 3
    arm["masses"] = [[0.2, 0.15, 0.1]] * 3
    arm["bases"] = [[0.0, 0.0], [0.6, 0.0], [0.3, 0.5]]
    arm["elbow"] = [1.0, -1.0, 1.0]
    arm["ee_angle"] = [0.0, 3.14, 1.57]
    arm["offplane"] = [[1.0, 0.5, 0.2]] * 3
    arm["damping"] = [[0.25] * 3] * 3
    with pytest.raises(ScenarioError, match="3 agents.*2 offsets"):
        build_plant(cfg)


def test_shared_rows_tile_per_agent(tmp_path):
    plant = build_plant(load_scenario(toy_config(tmp_path)))
    assert plant.team.lengths.shape == (2, 3)
    assert plant.team.masses.shape == (2, 3)
    assert np.array_equal(plant.team.lengths[0], plant.team.lengths[1])
    # defaults: mid-link centres of mass, slender-rod inertia
    assert np.allclose(plant.team.com, plant.team.lengths / 2)


def test_gravity_comp_and_damping_plumbing():
    ppc = build_plant(load_scenario("planar_duo_ppc"))
    assert ppc.team.gravity == 0.0          # drivers null the arms' weight
    assert np.all(ppc.team.damping == 0.25)  # gear friction stays physical
    assert ppc.body.gravity == pytest.approx(9.81)
    ada = build_plant(load_scenario("planar_duo_adaptive"))
    assert ada.team.gravity == 0.0
    assert np.all(ada.team.damping == 0.0)


def test_controller_kind_selection(tmp_path):
    cfg = load_scenario(toy_config(tmp_path))
    plant, ref = build_plant(cfg), build_reference(cfg)
    with pytest.raises(ScenarioError, match=r"controller.adaptive"):
        build_controller(cfg, plant, ref, kind="adaptive")
    with pytest.raises(ScenarioError, match="unknown controller"):
        build_controller(cfg, plant, ref, kind="pid")
    cfg["controller"].pop("type")
    with pytest.raises(ScenarioError, match="no controller.type"):
        build_controller(cfg, plant, ref)


def test_funnel_sections_exclusive(tmp_path):
    cfg = load_scenario(toy_config(tmp_path))
    cfg["controller"]["funnel"]["pose_auto"] = {
        "margin": 0.09, "rho_inf": 0.01, "decay": 0.5, "pitch_cap": 0.1}
    plant, ref = build_plant(cfg), build_reference(cfg)
    with pytest.raises(ScenarioError, match="pose/pose_auto"):
        build_controller(cfg, plant, ref)
    del cfg["controller"]["funnel"]["pose_auto"]
    del cfg["controller"]["funnel"]["velocity"]
    with pytest.raises(ScenarioError, match="velocity/velocity_auto"):
        build_controller(cfg, plant, ref)


def test_adaptive_estimate_start(tmp_path):
    cfg = load_scenario("planar_duo_adaptive")
    ctrl, est0 = build_controller(cfg, build_plant(cfg),
                                  build_reference(cfg))
    assert est0 is None                      # zero start is the default
    cfg["controller"]["adaptive"]["estimates"] = "true"
    plant = build_plant(cfg)
    ctrl, est0 = build_controller(cfg, plant, build_reference(cfg))
    assert est0 is not None and np.linalg.norm(est0) > 0
    assert np.array_equal(est0, ctrl.perfect_estimates())
    cfg["controller"]["adaptive"]["estimates"] = "guess"
    with pytest.raises(ScenarioError, match="'zero' or 'true'"):
        build_controller(cfg, plant, build_reference(cfg))


def test_initial_pose_shape(tmp_path):
    cfg = load_scenario(toy_config(tmp_path))
    cfg["initial"]["pose"] = [0.3, 0.0, 0.15]
    with pytest.raises(ScenarioError, match="6 entries"):
        build_run(cfg)


@pytest.mark.parametrize("name,duration", [
    ("planar_duo_ppc", 0.5),
    ("planar_duo_adaptive", 0.5),
    ("quad_arm_adaptive", 0.05),
    ("quad_arm_ppc", 0.2),
    ("quad_arm_ppc_untuned", 0.01),
])
def test_bundled_scenarios_run(name, duration):
    run = build_run(load_scenario(name), duration=duration)
    res = simulate(run.plant, run.controller, **run.kwargs)
    assert res.report.completed
    assert np.all(np.isfinite(res.columns["pose"]))


def test_seed_override_controls_disturbance():
    def tail(seed):
        run = build_run(load_scenario("quad_arm_adaptive"), duration=0.05,
                        seed=seed)
        return simulate(run.plant, run.controller, **run.kwargs)

    a, b, c = tail(7), tail(7), tail(8)
    assert np.array_equal(a.columns["pose"], b.columns["pose"])
    assert not np.array_equal(a.columns["pose"], c.columns["pose"])
