"""
Exact matrix censuses against the counting bounds
=================================================

Count matrices of determinant l in Gamma_0(N)-type sets with |u(z)| <= delta
and compare the sums with the polynomial right-hand sides, fitting one
constant per family.
"""
import collections

from suplab.census import census_table
from suplab.conformance import acceptance_grid, run_grid

cfg = acceptance_grid()[7]
table = census_table(cfg.z, cfg.N, cfg.delta, 12)
print(f"z={cfg.z:.4f} N={cfg.N} delta={cfg.delta}")
for l, s in table.items():
    print(f"  l={l:2d}  M*={s.m_star:5d}  Mu={s.m_upper:4d}  Mp={s.m_parab:3d}")

comps, consts = run_grid()
worst = collections.defaultdict(lambda: (0.0, ""))
for c in comps:
    if c.ratio > worst[c.family][0]:
        worst[c.family] = (c.ratio, f"{c.mode} at N={c.config.N}, delta={c.config.delta}")
for family, (r, where) in sorted(worst.items()):
    print(f"{family:6s} C={consts[family]:.4f}  attained by {where}")
