"""Random configurations and blown-up states for property checks."""
import numpy as np

from .blowup import BlownUpState
from .central import random_shape
from .newton import mass_inner, potential_and_gradient, rotate90


def centered(system, a):
    return a - system.m @ a / system.total_mass


def random_velocity(system, rng, scale=1.0):
    return centered(system, scale * rng.standard_normal((system.n, 2)))


def random_state(system, rng, r=None):
    """Blown-up state with a random shape; ``r`` random in [0, 2] unless given."""
    s = random_shape(system, rng)
    y = random_velocity(system, rng, scale=2.0)
    if r is None:
        r = float(rng.uniform(0.0, 2.0))
    return BlownUpState(r=float(r), s=s, y=y)


def random_full_collision_state(system, rng):
    """State on {r = 0, H~ = 0}: random shape and direction, speed fixed by K~ = U(s)."""
    s = random_shape(system, rng)
    y = random_velocity(system, rng)
    # occasionally pin the rotational or horizontal part to zero to probe the boundary cases
    mode = rng.integers(0, 4)
    if mode == 1:
        y = mass_inner(system, s, y) * s + mass_inner(system, rotate90(s), y) * rotate90(s)
    elif mode == 2:
        y = y - mass_inner(system, rotate90(s), y) * rotate90(s)
    elif mode == 3:
        y = s * np.sign(rng.standard_normal())
    U, _ = potential_and_gradient(system, s)
    y = y * np.sqrt(2 * U / mass_inner(system, y, y))
    return BlownUpState(r=0.0, s=s, y=y)
