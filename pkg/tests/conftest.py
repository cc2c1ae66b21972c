"""Shared scenario fixtures for the test suite."""

TOY = """
name = "toy"

[object]
mass = 0.2
inertia = [0.002, 0.002, 0.002]

[grasp]
offsets = [[-0.1, 0.0, 0.0], [0.1, 0.0, 0.0]]
mass_shares = [1.0, 1.0]
inertia_shares = [0.5, 0.5]

[team.planar]
lengths = [0.15, 0.15, 0.15]
masses = [0.2, 0.15, 0.1]
bases = [[0.0, 0.0], [0.6, 0.0]]
elbow = [1.0, -1.0]
ee_angle = [0.0, 3.141592653589793]
offplane = [1.0, 0.5, 0.2]
gravity_comp = true
damping = [0.25, 0.25, 0.25]

[reference]
offset = [0.3, 0.0, 0.15, 0.0, 0.0, 0.0]
amplitude = [0.02, 0.0, 0.02, 0.0, 0.1, 0.0]
frequency = [0.2, 0.0, 0.2, 0.0, 0.4, 0.0]
phase = [0.0, 0.0, 3.141592653589793, 0.0, 0.0, 0.0]

[initial]
pose = [0.3, 0.0, 0.15, 0.0, 0.0, 0.0]

[simulation]
duration = 0.5
mode = "sampled"
control_rate = 120.0

[controller]
type = "funnel"

[controller.funnel]
pose_gain = 0.05
vel_gain = 10.0

[controller.funnel.pose]
rho0 = [0.05, 0.05, 0.05, 0.4, 0.4, 0.4]
rho_inf = [0.02, 0.02, 0.02, 0.2, 0.2, 0.2]
decay = 0.2

[controller.funnel.velocity]
rho0 = [10.0, 10.0, 15.0, 7.0, 7.0, 7.0]
rho_inf = [5.0, 5.0, 10.0, 3.0, 3.0, 3.0]
decay = 0.2
"""


def toy_config(tmp_path, mangle=None, text=TOY, name="toy.toml"):
    """Writes the toy scenario (optionally transformed) into tmp_path."""
    if mangle is not None:
        text = mangle(text)
    f = tmp_path / name
    f.write_text(text)
    return f
