"""
When does entanglement help?
============================

Ratio of optimal GHZ to optimal uncorrelated uncertainty as the register
grows, at a fixed detuning of 0.1 and noise rate 1e-6. The curve falls like
1/sqrt(L) until L G reaches the detuning, then levels off.
"""
import numpy as np

from ghzmag import sensitivity
from ghzmag.lindblad import NoiseModel, SystemParams

Ls = 2 ** np.arange(0, 25, 2)
for kind in ("parallel", "depolarizing"):
    print(kind)
    for L in Ls:
        r = sensitivity.ratio(SystemParams(1.0, 1.1, 0.0, int(L), NoiseModel(kind, 1e-6)))
        print(f"  L={L:>9}  ratio={r:.4e}  ratio*sqrt(L)={r * np.sqrt(L):.3f}")
