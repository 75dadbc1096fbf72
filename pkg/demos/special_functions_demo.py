"""Gamma and parabolic-cylinder functions.

Shows the identities the long-time formula relies on: the reflection value
|Gamma(i nu)|^2 = pi / (nu sinh(pi nu)) and the three-term recurrence and
Weber equation for D_a(z), across the switch from the convergent series to
the large-|z| expansion.

    python3 demos/special_functions_demo.py
"""
import math

import numpy as np

from manakov_asym.special import (gamma, ln_gamma, pcf_d, pcf_d_asymptotic, pcf_d_series,
                                  recurrence_residual, weber_residual)

print("nu        |Gamma(i nu)|^2 nu sinh(pi nu) / pi")
for nu in (-0.01, -0.11, -0.5, -1.0, -3.0):
    v = abs(np.exp(ln_gamma(1j * nu))) ** 2 * nu * math.sinh(math.pi * nu) / math.pi
    print(f"{nu:+6.2f}    {v:.15f}")

print(f"\nGamma(1/2)^2 / pi = {(gamma(0.5) ** 2 / math.pi).real:.15f}")

print("\nD_a(z) on the positive axis, a = 0.3i")
print("   z      series                              asymptotic                     |diff|")
for z in (6.5, 8.0, 12.0):
    s, a = pcf_d_series(0.3j, z), pcf_d_asymptotic(0.3j, z)
    print(f"{z:5.1f}   {complex(s):.12e}   {complex(a):.12e}   {abs(s - a):.1e}")

print("\nresiduals, relative to the largest term")
for a, z in [(0.3j, 2.0), (-1.5 + 2j, 7.0 * np.exp(0.3j)), (4 - 3j, -5 + 1j)]:
    r, scale = recurrence_residual(a, z)
    print(f"a = {a!s:>12}  z = {complex(z):.3f}   recurrence {r / scale:.1e}   "
          f"Weber {weber_residual(a, z):.1e}   |D_a(z)| = {abs(pcf_d(a, z)):.3e}")
