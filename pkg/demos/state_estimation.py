"""Recovering a state from a handful of noisy linear measurements.

Draws a random estimation problem (ambient dimension 50, 10 measurement
functionals, 5-dimensional model space), then estimates random states two
ways: the best fit in the model space, and the generalized interpolant
that reproduces the data exactly.  Both errors stay below the stability
constant times (model error + noise), which is the a priori guarantee.
"""

import numpy as np

from shaperec.pbdw import (
    best_fit,
    e_n,
    generalized_interpolation,
    mu_stability,
    random_problem,
    riesz_norm,
)


def main():
    prob = random_problem(D=50, m=10, n=5, seed=42)
    mu = mu_stability(prob)
    print(f"stability constant mu = {mu:.3f} (error inflation worst case)")
    print(f"{'trial':>5} {'model err':>10} {'noise':>8} {'best-fit':>9} "
          f"{'interp':>9} {'bound':>9}")
    rng = np.random.default_rng(7)
    for t in range(5):
        u = rng.standard_normal(50)
        g = rng.standard_normal(10)
        eta = g * (0.01 / np.linalg.norm(g))
        z = prob.meas @ u + eta
        en = e_n(prob, u)
        nw = riesz_norm(prob, eta)
        u_tilde, _ = best_fit(prob, z)
        u_star = generalized_interpolation(prob, z)
        bound = mu * (en + nw)
        e_bf = np.linalg.norm(u - u_tilde)
        e_gi = np.linalg.norm(u - u_star)
        print(f"{t:>5} {en:10.3f} {nw:8.4f} {e_bf:9.3f} {e_gi:9.3f} {bound:9.3f}")
        assert max(e_bf, e_gi) <= bound + 1e-8
        assert np.abs(prob.meas @ u_star - z).max() <= 1e-10
    print("all errors within the guarantee; interpolant reproduces the data")


if __name__ == "__main__":
    main()
