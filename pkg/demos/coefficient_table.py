#!/usr/bin/env python3
# Tabulate the envelope-equation coefficients across carrier wavenumbers and
# emit the frozen k0 = 1 reference block used by the test suite.

import numpy as np

from nlslab.nls import nls_coefficients, nu2

KS = (0.5, 0.8, 1.0, 1.3, 1.7, 2.0)

fields = list(nls_coefficients(1.0).to_dict())
print("coefficients by carrier wavenumber")
print("  " + "  ".join(f"{name:>9s}" for name in fields))
for k0 in KS:
    row = nls_coefficients(k0).to_dict()
    print("  " + "  ".join(f"{row[name]:+9.4f}" for name in fields))

# the cubic self-interaction splits into a direct cubic part and the feedback
# of the quadratic harmonics; both matter
print()
print("nu2 decomposition at k0 = 1:")
print("  full        %+.6f" % nu2(1.0))
print("  quadratic   %+.6f (second harmonic + mean flow feedback)" % nu2(1.0, include_cubic=False))

# focusing vs defocusing: the envelope soliton exists when nu1*nu2 > 0
print()
print("sign(nu1 * nu2) along k0:")
ks = np.linspace(0.3, 3.0, 28)
signs = ["+" if nls_coefficients(k).nu1 * nls_coefficients(k).nu2 > 0 else "-" for k in ks]
print("  k0 in [0.3, 3.0]: " + "".join(signs))

print()
print("frozen reference block for tests (k0 = 1, paste verbatim):")
co = nls_coefficients(1.0).to_dict()
print("COEFFS_K0_1 = {")
print('    "k0": 1.0,')
print('    "omega0": math.sqrt(1.5),')
for name in fields[2:]:
    print(f'    "{name}": {co[name]!r},')
print("}")
