"""
The signal window
=================

W(t) weights how much of the oscillating field accumulates in a run of
length t. It starts at 2 and decays like 1/(|omega - m| t) once the detuned
term dephases.
"""
import numpy as np

from ghzmag.analytic import window

omega = 1.0
t = np.geomspace(1e-3, 1e4, 8)
for m in (1.0, 1.001, 1.1, 3.0):
    row = " ".join(f"{w:8.4f}" for w in window(t, omega, m))
    print(f"m={m:<6} {row}")

# envelope check well past the dephasing time
m = 1.2
late = np.linspace(100, 1000, 5)
print("|W| * |omega-m| t:", np.round(np.abs(window(late, omega, m)) * abs(omega - m) * late, 3))
