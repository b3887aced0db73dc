"""Where does the alpha-entropy estimate live?

For mobility exponent n the estimate needs a theta > 0 with

    (1/3)(alpha+n-2)(2 theta - 1 - (alpha+n)) - (theta-1)^2 > 0.

Such a theta exists exactly for alpha in (1/2 - n, 2 - n).  This script
prints the admissible theta interval across that window, the matching
integrability exponent p = alpha + n + 5 (in its window only for alpha > -1)
and the window table for a few n.

    python3 demos/03_exponent_region.py
"""

import numpy as np

from stfe.exponents import admissible_theta_interval, p_from_alpha, region_scan, windows

n = 8.0 / 3.0
print(f"n = {n:.4f}: alpha window for theta ({0.5 - n:.4f}, {2 - n:.4f})")
print(f"{'alpha':>8} {'theta-':>8} {'theta+':>8} {'p':>8}  p status")
for alpha in np.linspace(0.5 - n, 2 - n, 9)[1:-1]:
    iv = admissible_theta_interval(alpha, n)
    p = p_from_alpha(alpha, n)
    print(f"{alpha:8.4f} {iv[0]:8.4f} {iv[1]:8.4f} {p.value:8.4f}  {p.status}")

scan = region_scan(n)
lo, hi = scan.admissible_alpha_extent()
print(f"\ngrid scan: admissible alpha from {lo:.4f} to {hi:.4f} ({scan.admissible.sum()} of {scan.lhs.size} cells)")

print(f"\n{'n':>6} {'p window':>20} {'nu window':>20} {'nu5 window':>20}")
for n in (2.2, 8 / 3, 2.9, 2.999):
    w = windows(n)
    fmt = lambda t: f"({t[0]:.4f}, {t[1]:.4f})"
    print(f"{n:6.3f} {fmt(w.p):>20} {fmt(w.nu):>20} {fmt(w.nu5):>20}")
