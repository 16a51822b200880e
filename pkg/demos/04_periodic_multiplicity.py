#!/usr/bin/env python3
"""Finding geometrically distinct periodic solutions by multistart shooting.

The showcase system couples a pendulum (angular block, M = 1) with an
asymmetric oscillator through a small bounded interaction:

    q'' + sin q          = -dP/dq,
    u'' + 4 u+ - u-      = -dP/du,       P = 0.1 sin(q) sin(u),

with T = 2 pi.  The oscillator's period 3 pi/2 sits strictly inside the
window (pi, 2 pi), the pendulum block has the twist property on a large
momentum rectangle, and the theory then promises at least M + 1 = 2
geometrically distinct T-periodic solutions (solutions are identified when
their angular coordinates differ by multiples of 2 pi).
"""

import time

import numpy as np

from hamshoot import (CoupledSystem, DecompositionData, MultistartSpec,
                      asymmetric, classify_resonance, constant_path,
                      estimate_mbar, fourier_paths, multistart_periodic,
                      revalidate, twist_check, SampleBox)


def build_system(eps=0.1):
    H41 = asymmetric(4.0, 1.0)

    def grad_H(t, x, y):
        return (np.array([np.sin(x[0])]), np.array([y[0]]))

    def grad_P(t, x, y, w):
        return (np.array([eps * np.cos(x[0]) * np.sin(w[0])]),
                np.zeros(1),
                np.array([eps * np.sin(x[0]) * np.cos(w[0]), 0.0]))

    return CoupledSystem(M=1, F=lambda t, w: np.asarray(H41.grad(w), dtype=float),
                         grad_H=grad_H, grad_P=grad_P, T=2 * np.pi, w_kink=True,
                         decomposition=DecompositionData(H41, H41,
                                                         lambda t, w: np.zeros(2)))


def main():
    sys_ = build_system()
    print("=== hypothesis checks ===")
    rc = classify_resonance(1.5 * np.pi, 1.5 * np.pi, 2 * np.pi)
    print(f"  resonance: {rc}  (pi < 3 pi/2 < 2 pi)")

    box = SampleBox(t_range=(0, 2 * np.pi), x_ranges=((0, 2 * np.pi),),
                    y_ranges=((-1, 1),))
    mbar = estimate_mbar(lambda t, x, y, w: sys_.grad_P(t, x, y, w)[2], box, 4000)
    print(f"  coupling bound m_bar ~ {mbar:.4f} (analytic sup = 0.1)")

    ens = [constant_path([0.0, 0.0])] + fourier_paths(2, 1.0, 3, 2 * np.pi, seed=1)
    rep = twist_check(sys_, D=[(-8.0, 8.0)], sigma=[1], ensemble=ens,
                      x_points=4, y_points=1)
    print(f"  twist on D = [-8, 8]: {'pass' if rep.passed else 'FAIL'} "
          f"({len(rep.samples)} frozen-path samples)")

    print("\n=== multistart shooting ===")
    spec = MultistartSpec(x_points=4, y_ranges=((-0.6, 0.6),), y_points=1,
                          w_radii=(0.25,), w_angles=2)
    t0 = time.time()
    result = multistart_periodic(sys_, spec, newton_tol=1e-9)
    dt = time.time() - t0
    s = result.stats
    print(f"  {s['attempted']} starts -> {s['converged']} converged "
          f"({s['max_iterations']} max-iter, {s['singular_stall']} stalled) "
          f"in {dt:.1f} s")
    print(f"  geometrically distinct classes: {result.partition.n_classes} "
          f"(theory: at least {sys_.M + 1})")
    print(f"\n  {'class':>5} {'x(0)':>10} {'y(0)':>10} {'u(0)':>10} {'v(0)':>10} "
          f"{'residual':>10} {'turns':>5}")
    for k, r in enumerate(result.records):
        print(f"  {k:5d} {r.x0_normalized[0]:10.6f} {r.y0[0]:10.6f} "
              f"{r.w0[0]:10.6f} {r.w0[1]:10.6f} {r.residual:10.1e} "
              f"{'-' if r.turns is None else r.turns:>5}")

    print("\n=== independent re-validation at 10x tighter integration ===")
    for k, r in enumerate(result.records):
        print(f"  class {k}: residual re-check {revalidate(sys_, r):.2e}")


if __name__ == "__main__":
    main()
