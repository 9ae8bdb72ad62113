import pytest

from surfaction import NATURAL, Particle, Trajectory

# (expression, speed range on [0, 10]) -- every member stays inside (0.05c, 0.95c)
LINES = [f"{a / 10:.1f}*t" for a in range(1, 10)]
SIN_PERTURBED = [
    "0.5*t + 0.2*sin(t)",
    "0.3*t + 0.1*sin(2*t)",
    "0.6*t + 0.3*sin(t)",
    "0.7*t + 0.1*sin(1.5*t)",
    "0.4*t + 0.05*sin(3*t)",
    "-0.5*t + 0.2*sin(t)",
]
TANH_RAMPS = [
    "0.1*t + tanh((t - 5)/2)",
    "0.2*t + 2*tanh((t - 5)/3)",
    "0.5*t + 0.8*tanh((t - 5)/2)",
    "0.3*t + tanh((t - 5)/4)",
    "0.06*t + 0.5*tanh(t - 5)",
]
OTHER = ["0.3*t + 0.01*t^2"]
BATTERY = LINES + SIN_PERTURBED + TANH_RAMPS + OTHER


@pytest.fixture(scope="session")
def battery():
    return [Trajectory.analytic(e, 0.0, 10.0, NATURAL) for e in BATTERY]


@pytest.fixture
def unit_mass():
    return Particle(1.0)


@pytest.fixture
def line06():
    return Trajectory.analytic("0.6*t", 0.0, 10.0)
