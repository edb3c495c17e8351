"""Manufactured nearly-incompressible test case on the unit square.

The displacement is a divergence-free trigonometric swirl plus a
1/(1 + lambda)-scaled perturbation, so it stays bounded (and the body
force stays O(1)) as lambda grows; the boundary values vanish exactly.
The body force below is the closed form of -div(2 mu eps(u) +
lambda div(u) I) for this displacement; a finite-difference gate in the
tests guards the derivation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


def exact_solution(x, y, lam):
    """Displacement components (u1, u2) at (x, y) for parameter lam.

    Accepts scalars or arrays; complex input is supported so the
    gradient can be probed by complex-step differentiation.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    sx, cx = np.sin(TWO_PI * x), np.cos(TWO_PI * x)
    sy, cy = np.sin(TWO_PI * y), np.cos(TWO_PI * y)
    u1 = (cx - 1.0) * sy + sx * sy / (1.0 + lam)
    u2 = -(cy - 1.0) * sx + x * (1.0 - x) * y * (1.0 - y) / (1.0 + lam)
    return u1, u2


def exact_forcing(x, y, mu, lam):
    """Body force (f1, f2) = -div sigma(u) for the solution above."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sx, cx = np.sin(TWO_PI * x), np.cos(TWO_PI * x)
    sy, cy = np.sin(TWO_PI * y), np.cos(TWO_PI * y)
    four_pi2 = TWO_PI ** 2
    w = (mu + lam) / (1.0 + lam)
    f1 = (mu * four_pi2 * (2.0 * cx - 1.0) * sy
          + mu / (1.0 + lam) * 2.0 * four_pi2 * sx * sy
          - w * ((1.0 - 2.0 * x) * (1.0 - 2.0 * y) - four_pi2 * sx * sy))
    f2 = (-mu * four_pi2 * (2.0 * cy - 1.0) * sx
          + 2.0 * mu / (1.0 + lam) * (x * (1.0 - x) + y * (1.0 - y))
          - w * (four_pi2 * cx * cy - 2.0 * x * (1.0 - x)))
    return f1, f2


@dataclass(frozen=True)
class ManufacturedCase:
    """Displacement/force pair for one material parameter set."""

    mu: float
    lam: float

    def displacement(self, x, y):
        return exact_solution(x, y, self.lam)

    def forcing(self, x, y):
        return exact_forcing(x, y, self.mu, self.lam)


def make_case(lam: float, mu: float = 1.0) -> ManufacturedCase:
    return ManufacturedCase(mu=mu, lam=lam)
