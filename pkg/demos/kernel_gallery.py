#!/usr/bin/env python3
"""Gallery of the normal-form kernels near their delicate points.

Four panels: the weighted low-band kernel on its support, the high-low
kernel walking through the resonant line, the high-high kernel approaching
its large-k expansion, and the cascaded-denominator scan.  Writes
kernel_gallery.png in the working directory.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from nlslab.dispersion import omega, qhat
from nlslab.normal_form import (
    Weight,
    b01_line_kernel,
    b10_kernel,
    b11_kernel,
    d_transform_check,
)

k0 = 1.0
w = Weight(0.05, 0.1)

fig, axes = plt.subplots(2, 2, figsize=(11.0, 7.5))

# low-band kernel along the carrier line, weighted by theta: stays O(1)
# even though bare values reach O(1/eps) at the origin
ax = axes[0, 0]
ks = np.linspace(-0.1, 0.1, 801)
for n, style in ((1, "k-"), (2, "b--"), (3, "g-."), (4, "r:")):
    vals = b01_line_kernel(n, -1, 1, 1, 1, ks, k0, w)
    ax.plot(ks, w.theta(ks) * vals, style, label="n=%d" % n)
ax.set_xlabel("k")
ax.set_title("theta-weighted low-band kernel, carrier leg at +k0", fontsize=9)
ax.legend(fontsize=8)

# high-low kernel through m -> 0 on the branch whose mismatch degenerates:
# the ramp weight supplies the offsetting zero, so the limits are finite
ax = axes[0, 1]
ms = np.linspace(-0.1, 0.1, 2001)
for (j1, j2), style in (((-1, -1), "k-"), ((-1, 1), "b--"), ((1, -1), "g-."), ((1, 1), "r:")):
    vals = b10_kernel(1, j1, j2, k0 + ms, np.full_like(ms, k0), ms, w)
    ax.plot(ms, vals, style, label="j=(%+d,%+d)" % (j1, j2))
ax.set_xlabel("m")
ax.set_title("high-low kernel (n=1) through the resonant line m = 0", fontsize=9)
ax.legend(fontsize=8)

# high-high kernel at large k: linear growth with a coefficient fixed by the
# input leg; the distance to the asymptote decays like 1/k
ax = axes[1, 0]
ks_far = np.linspace(5.0, 400.0, 396)
ms_far = ks_far - k0
j = -1
vals = np.asarray(b11_kernel(1, j, j, ks_far, np.full_like(ks_far, k0), ms_far, w))
asym = j * ks_far * qhat(ms_far) / (2.0 * (j * k0 + omega(k0)))
ax.plot(ks_far, np.abs(vals - asym) * ks_far, "k-")
ax.set_xlabel("k")
ax.set_ylabel("|kernel - asymptote| * k")
ax.set_title("high-high kernel (n=1, same branch): 1/k approach", fontsize=9)

ax = axes[1, 1]
ks_low = np.linspace(-0.1, 0.1, 2001)
for (j1, j3), style in (((1, 1), "k-"), ((-1, 1), "b--"), ((1, -1), "g-."), ((-1, -1), "r:")):
    d = -j1 * omega(ks_low) - 2.0 * omega(k0) + j3 * omega(ks_low - 2.0 * k0)
    ax.plot(ks_low, np.abs(d), style, label="(j1,j3)=(%+d,%+d)" % (j1, j3))
ax.set_yscale("log")
ax.set_xlabel("k")
ax.set_title("cascaded-transform mismatch |d(k)|", fontsize=9)
ax.legend(fontsize=8)

fig.tight_layout()
fig.savefig("kernel_gallery.png", dpi=140)
print("wrote kernel_gallery.png")

print()
print("cascaded-denominator lower bounds (k0 = 1, |k| <= 0.1):")
for j1 in (1, -1):
    for j3 in (1, -1):
        rep = d_transform_check(k0, j1, j3)
        print("  j1=%+d j3=%+d: min |d| = %.6f (value at k=0: %.6f)" % (j1, j3, rep.min_abs, rep.value_at_zero))
