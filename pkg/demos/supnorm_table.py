"""
Sup-norm table over the catalogue
=================================

Scan y^{k/2}|f| over the reduced domain for every catalogue form of weight
k > 2 and fit log(normalized_sup) against log(N).  At these levels the fit
is descriptive; it says nothing about the asymptotic exponent.
"""
from suplab.catalog import LABELS, get_form
from suplab.supnorm import fit_exponent, scan_sup

rows = []
for label in LABELS:
    f = get_form(label)
    if f.k <= 2:
        continue
    rep = scan_sup(f)
    rows.append((f.N, rep.normalized_sup))
    print(f"{label:8s} N={f.N:2d} k={f.k:2d} sup={rep.sup_value:.10g} "
          f"argmax={rep.argmax.z:.6f} normalized={rep.normalized_sup:.8f} "
          f"high-y branch: {rep.high_branch}")

slope, intercept, res = fit_exponent([r for r in rows if r[0] > 1])
print(f"slope over N > 1: {slope:.4f}, residuals {res.round(4).tolist()}")
