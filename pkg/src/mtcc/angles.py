"""Circular arithmetic helpers shared by the descriptor, matcher and map code.

All angles are radians.  Directed angles (minutia directions) live in
[0, 2pi), signed differences in [-pi, pi).
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_two_pi(theta):
    """Wrap an angle (scalar or array) into [0, 2pi)."""
    return np.mod(theta, TWO_PI)


def wrap_pi(theta):
    """Wrap an angle (scalar or array) into [-pi, pi).  +pi maps to -pi."""
    return np.mod(theta + np.pi, TWO_PI) - np.pi


def angle_diff(theta1, theta2):
    """Signed circular difference theta1 - theta2 in [-pi, pi).

    Equivalent to the three-branch definition: keep the raw difference when
    it already lies in [-pi, pi), add 2pi below the range, subtract 2pi at
    or above +pi.  Works elementwise on arrays.
    """
    return wrap_pi(np.subtract(theta1, theta2, dtype=float))
