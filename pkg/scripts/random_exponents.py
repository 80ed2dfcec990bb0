"""Energy and overlap exponents across random special models."""
import argparse

import numpy as np

from ep3chiral.model import build_special, ep3_couplings, ep_vector
from ep3chiral.puiseux import DEFAULT_RADII, radial_samples, verify_energy_expansion, verify_overlap_scaling


def random_params(rng):
    while True:
        e = rng.uniform(-2.5, 2.5, 3) + 1j * rng.uniform(-1, 1, 3)
        if abs(e[0] - e[1]) <= 0.2:
            continue
        signs = tuple(int(s) for s in rng.choice([1, -1], 2))
        p = ep3_couplings(*e, *signs)
        if not p.degenerate and min(abs(p.s2), abs(p.s3)) >= 1e-3:
            return p


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    rows = []
    for _ in range(args.n):
        p = random_params(rng)
        f = build_special(p)
        psi = ep_vector(*p.e, p.sign_s2, p.sign_s3)
        s = radial_samples(f, 0, 1, DEFAULT_RADII)
        en = verify_energy_expansion(f, samples=s)
        ov = verify_overlap_scaling(f, 0, 1, DEFAULT_RADII, psi, samples=s)
        rows.append([min(x.exponent for x in en.fits), max(x.exponent for x in en.fits),
                     ov.norm_fit.exponent, ov.overlap_fit.exponent])
    a = np.array(rows)
    print(f"{args.n} models")
    print(f"energy exponent range  [{a[:, 0].min():.4f}, {a[:, 1].max():.4f}]")
    print(f"norm exponent range    [{a[:, 2].min():.4f}, {a[:, 2].max():.4f}]")
    print(f"overlap exponent range [{a[:, 3].min():.4f}, {a[:, 3].max():.4f}]")


if __name__ == "__main__":
    main()
