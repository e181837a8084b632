"""
Choosing the interrogation time
===============================

For a fixed total time the best run length balances signal growth against
decoherence or dephasing of the window. Compare the optimiser with the two
simple rules of thumb.
"""
from ghzmag import sensitivity
from ghzmag.lindblad import NoiseModel, SystemParams
from ghzmag.quantum import Scheme
from ghzmag.sensitivity import MeasurementBudget

G = 1e-6

# detuning wins: t_opt ~ 1/|omega - m|
for d in (1e-3, 1e-2, 1e-1):
    p = SystemParams(1.0, 1.0 + d, 0.0, 1, NoiseModel.parallel(G))
    res = sensitivity.optimize_time(p, MeasurementBudget(L=1))
    print(f"detuning {d:g}: t_opt * detuning = {res.t_opt * d:.3f} ({res.regime})")

# noise wins for large GHZ states
for kind in ("parallel", "depolarizing"):
    for L in (10**3, 10**4):
        p = SystemParams(1.0, 1.0 + 1e-6, 0.0, L, NoiseModel(kind, G))
        res = sensitivity.optimize_time(p, MeasurementBudget(L=L, scheme=Scheme.GHZ))
        print(f"{kind:12s} L={L:>6}: t_opt * L * G = {res.t_opt * L * G:.3f}")
