#!/usr/bin/env python3
"""Resonance regimes of a period pair against the window (T/(N+1), T/N).

With tau2 <= tau1 (the ordering induced by H1 <= H2), the multiplicity
theory distinguishes four regimes: strictly inside a window (nonresonant),
touching its upper end tau1 = T/N (simple resonance from below), touching
its lower end tau2 = T/(N+1) (simple resonance from above), or both
(double resonance).  In the resonant regimes the conclusion needs an extra
Landesman-Lazer hypothesis; see demo 03.
"""

import numpy as np

from hamshoot import asym_period, classify_resonance


def main():
    T = 6.0
    print(f"=== classification against T = {T} ===")
    cases = [
        (2.5, 2.1), (3.0, 2.5), (2.5, 2.0), (3.0, 2.0),
        (2.9, 2.9), (6.0, 3.0), (2.0, 2.0), (5.0, 1.2),
    ]
    for tau1, tau2 in cases:
        rc = classify_resonance(tau1, tau2, T)
        print(f"  tau1 = {tau1:4.2f}, tau2 = {tau2:4.2f}  ->  {rc}")

    print("\n=== an asymmetric pair driven through the regimes by T ===")
    tau1 = asym_period((4.0, 1.0))        # 3 pi / 2
    tau2 = asym_period((9.0, 4.0))        # 5 pi / 6
    print(f"  tau1 = {tau1:.6f} (stiffness 4, 1),  tau2 = {tau2:.6f} (stiffness 9, 4)")
    for T in (1.03 * tau1, 2 * tau2, 1.9 * tau2, 3 * tau2, 2 * tau1, 6 * tau2):
        rc = classify_resonance(tau1, tau2, T)
        print(f"  T = {T:9.6f}  ->  {rc}")

    print("\n=== scale invariance ===")
    for c in (0.1, 1.0, 10.0):
        rc = classify_resonance(3.0 * c, 2.0 * c, 6.0 * c)
        print(f"  c = {c:5.1f}: (3c, 2c, 6c) -> {rc}")

    print("\n=== double resonance engineered from stiffness pairs ===")
    # tau1 = 2 pi (stiffness 1,1), tau2 = pi (stiffness 4,4): T = 2 pi gives
    # tau1 = T/1 and tau2 = T/2 exactly
    rc = classify_resonance(2 * np.pi, np.pi, 2 * np.pi)
    print(f"  tau1 = 2 pi, tau2 = pi, T = 2 pi -> {rc}")


if __name__ == "__main__":
    main()
