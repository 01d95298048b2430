"""The band-pass chain at every radio's sample rate.

A fifth-order Butterworth low-pass at 0.4 Hz is followed by a high-pass
at 0.1 Hz, both as cascades of second-order sections.
"""

import numpy as np

from rfresp import dsp
from rfresp.estimate import FILTER_ORDER, HP_CUTOFF, LP_CUTOFF

probe = np.array([0.02, 0.05, 0.1, 0.25, 0.4, 0.8, 1.6])
print("fs (Hz)  " + "  ".join(f"{f:>6.2f}" for f in probe) + "   (|H| of LP then HP)")
for fs in (18.9, 9.9, 16.25, 4.5, 25.0):
    lp = dsp.design_butterworth(FILTER_ORDER, LP_CUTOFF, fs, "low")
    hp = dsp.design_butterworth(FILTER_ORDER, HP_CUTOFF, fs, "high")
    h = np.abs(lp.response(probe) * hp.response(probe))
    print(f"{fs:7.2f}  " + "  ".join(f"{v:6.3f}" for v in h)
          + f"   stable={lp.is_stable() and hp.is_stable()}, sections={lp.n_sections}+{hp.n_sections}")
