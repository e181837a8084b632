"""
Probe dynamics under an AC field
================================

Integrate the master equation for a 3-qubit GHZ probe and compare the
Y-projection probability with the leading-order closed form.
"""
import numpy as np

from ghzmag import analytic, lindblad
from ghzmag.lindblad import NoiseModel, SystemParams
from ghzmag.quantum import ProbeState, Scheme

# weak field, slightly off resonance, sigma_X noise
params = SystemParams(omega=1.0, m=1.5, epsilon=1e-4, L=3, noise=NoiseModel.parallel(1e-2))
times = np.linspace(0, 20, 11)

trace = lindblad.probability_trace(params, ProbeState(Scheme.GHZ, 3), times)
closed = analytic.p_ghz_parallel(times, params).value

print(f"{'t':>6} {'numeric':>14} {'closed form':>14} {'diff':>10}")
for (t, p), q in zip(trace, closed):
    print(f"{t:6.1f} {p:14.10f} {q:14.10f} {abs(p - q):10.2e}")

# the same with depolarizing noise, where populations relax to 1/2^L
params = SystemParams(1.0, 1.5, 1e-4, 3, NoiseModel.depolarizing(1e-2))
long = np.linspace(0, 400, 5)
for (t, p), q in zip(lindblad.probability_trace(params, ProbeState(Scheme.GHZ, 3), long),
                     analytic.p_ghz_depolarizing_exact(long, params).value):
    print(f"t={t:5.0f}  p={p:.6f}  closed form={q:.6f}")
