"""Width pattern and handedness as arg(lambda) goes once around the EP."""
import argparse

import numpy as np

from ep3chiral.chirality import classify
from ep3chiral.errors import EPError
from ep3chiral.model import ep_vector, special_family


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radius", type=float, default=1e-3)
    ap.add_argument("--steps", type=int, default=24)
    ap.add_argument("--signs", nargs=2, type=int, default=(1, 1))
    args = ap.parse_args()

    f = special_family((0, 1, 3), tuple(args.signs))
    psi = ep_vector(0, 1, 3, *args.signs)
    print("arg_deg  pattern          handedness  worst_phase_dev")
    for a in np.linspace(0, 360, args.steps, endpoint=False):
        lam = args.radius * np.exp(1j * np.radians(a))
        try:
            rep = classify(f, lam, 0, psi)
            print(f"{a:7.1f}  {rep.width.variant.value:16s} {rep.handedness.value:11s} "
                  f"{rep.max_disagreement_deg:.2f}")
        except EPError as exc:
            print(f"{a:7.1f}  {type(exc).__name__}")


if __name__ == "__main__":
    main()
