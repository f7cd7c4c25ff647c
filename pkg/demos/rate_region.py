"""Pareto boundary of a literal channel under proper and improper signaling.

Sweeps the rate profile and prints one line per profile with the boundary
points of each method (bits per channel use).

    python3 demos/rate_region.py [H1|H2] [n_profiles]
"""

import sys

import numpy as np

from improper_ic.baselines import GridSpec, grid_oracle
from improper_ic.harness import literal_channel
from improper_ic.joint import joint_pareto_point
from improper_ic.pareto import RateProfile
from improper_ic.separate import improper_pareto_point, proper_point

if __name__ == "__main__":
    name = sys.argv[1] if len(sys.argv) > 1 else "H1"
    n = int(sys.argv[2]) if len(sys.argv) > 2 else 9
    inst = literal_channel(name, 0.0)
    spec = GridSpec(15, 7, 36, 3)
    print(f"channel {name} at 0 dB")
    print("alpha1   proper          separate        joint           oracle")
    for a1 in np.arange(1, n + 1) / (n + 1):
        alpha = RateProfile.from_first(float(a1))
        pts = [proper_point(inst, alpha), improper_pareto_point(inst, alpha),
               joint_pareto_point(inst, alpha, L=300), grid_oracle(inst, alpha, spec)]
        cells = ["({:.3f},{:.3f})".format(*p.rates_in("bits")) for p in pts]
        print(f"{a1:.2f}     " + "  ".join(cells))
