"""Calibrating the polarization analyzers for a Hardy test.

Find the analyzer angles that null three joint probabilities of the state
alpha|HH> - beta|VV>, then see how much is left in the fourth.
"""
import math

import numpy as np

from hardyghost import (PolarizationState, channel_settings, hardy_probability, joint_probability,
                        optimize_hardy, solve_hardy_angles, zero_conditions)

alpha, beta = 0.43, 0.9
angles = solve_hardy_angles(alpha, beta)
print("analyzer angles (deg):")
for name, value in angles.degrees().items():
    print(f"  {name:10s} {value:8.3f}")

# the state is rescaled to unit norm; the angles depend only on alpha/beta
state = PolarizationState.from_hardy(alpha, beta)
print("zero-condition residuals:", ["%.1e" % r for r in zero_conditions(state, angles)])
print(f"P(A1,B1) for the normalized state: {joint_probability(state, *channel_settings(4, angles)):.5f}")
print(f"closed form with the raw amplitudes:  {hardy_probability(alpha, beta):.5f}")

# a drifted source still measured with the old angles: the zeros are no longer zeros
drifted = PolarizationState.from_hardy(0.40, math.sqrt(1 - 0.16))
print("drifted state, channels 1-4:",
      " ".join(f"{joint_probability(drifted, *channel_settings(m, angles)):.4f}" for m in (1, 2, 3, 4)))

best = optimize_hardy()
print(f"\nbest Hardy state: alpha = {best.alpha:.4f}, beta = {best.beta:.4f}, P = {best.probability:.5f}")

# the objective over alpha, for a quick look at its shape
for a in np.linspace(0.1, 0.9, 9):
    b = math.sqrt(1 - a * a)
    print(f"  alpha {a:.1f}  P {hardy_probability(a, b):.5f}  " + "#" * int(hardy_probability(a, b) * 500))
