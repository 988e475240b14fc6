"""Reconstruction error under increasingly noisy cell averages.

Perturbs the exact disk averages with uniform noise of growing amplitude,
reconstructs with the center-weighted fit, and prints the seed-averaged L1
error.  The error tracks the noise level; cells whose stencil stays clear
of the boundary keep reading the correct constant because rounding the
central average absorbs any perturbation below one half.
"""

import math

from shaperec.measurements import Disk, Grid, NoiseModel, add_noise, lq_error, measure
from shaperec.recon import reconstruct

SHAPE = Disk((0.53, 0.51), 0.325)
SEEDS = (0, 1, 2)


def main():
    grid = Grid(32)
    base = measure(SHAPE, grid)
    print("uniform noise on a 32 x 32 grid, method licc, 3 seeds")
    print(f"{'eps':>10} {'avg L1 error':>14}")
    for eps in (0.0, 1.0 / 36.0, 1.0 / 18.0, 1.0 / 9.0):
        errs = []
        for seed in SEEDS if eps else SEEDS[:1]:
            if eps:
                field, _ = add_noise(base, NoiseModel(math.inf, eps, seed))
            else:
                field = base
            errs.append(lq_error(SHAPE, reconstruct(field, "licc"), 1.0))
        print(f"{eps:10.4f} {sum(errs) / len(errs):14.3e}")


if __name__ == "__main__":
    main()
