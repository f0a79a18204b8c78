"""
Checking the pre-trace identity on a one-dimensional space
==========================================================

For (N, k) = (5, 4) the cusp space is spanned by eta(z)^4 eta(5z)^4, so the
geometric kernel sum over Gamma_0(5) must reproduce |y^2 f(z)|^2 / <f, f>.
The truncated sum converges as the u-window grows.
"""
from suplab.catalog import get_form
from suplab.pretrace import amplified_residual, spectral_residual
from suplab.qseries import petersson_norm

f = get_form("5.4.a")
P = petersson_norm(f, 1e-8)
print(f"<f, f> = {P:.12e}")

z = 0.13 + 0.9j
for delta in (10, 20, 40, 80):
    chk = spectral_residual(f, z, delta, P)
    print(f"delta_max={delta:3d}  geometric={chk.geometric:.10e}  "
          f"spectral={chk.spectral:.10e}  residual={chk.residual:.2e}")

###############################################################################
# With the amplifier over primes 3 <= p < 6 coprime to 5 (only p = 3), the
# spectral side picks up the factor (sum_l x_l lambda(l))^2.

for delta in (10, 20, 40):
    chk = amplified_residual(f, z, 3, delta, P)
    print(f"amplified, delta_max={delta:3d}  residual={chk.residual:.2e}")
