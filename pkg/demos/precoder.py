"""Widely linear precoding of a proper codeword into an improper signal.

Builds ``B1, B2`` for a target (C, Ct), draws samples and compares the
sample statistics with the target.

    python3 demos/precoder.py
"""

import numpy as np

from improper_ic.signal_model import SignalStrategy
from improper_ic.widely_linear import augmented_sqrt, empirical_stats, sample_improper

if __name__ == "__main__":
    for ct in (0.0, 0.8j, 1.0, 0.6 * np.exp(2.0j)):
        s = SignalStrategy(1.0, ct)
        f = augmented_sqrt(s)
        C, Ct = empirical_stats(sample_improper(s, 200_000, rng=0))
        print(f"Ct = {complex(ct):.3f}: B1 = {complex(f.B1[0, 0]):.4f}, B2 = {complex(f.B2[0, 0]):.4f}, "
              f"sample C = {C[0, 0].real:.4f}, sample Ct = {complex(Ct[0, 0]):.4f}")
