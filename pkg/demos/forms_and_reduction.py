"""
Newforms, Hecke certification, Atkin-Lehner reduction and the amplifier
======================================================================

Build eta-quotient newforms exactly, certify them through the Hecke
relations, move points into the reduced domain and assemble the amplifier
signs x_l and weights y_l for one form.
"""
from suplab.amplifier import amp_lower, amplifier
from suplab.atkin_lehner import al_build, al_reduce, check_gap
from suplab.catalog import get_form
from suplab.qseries import EtaQuotient, eta_expand, hecke_check, lam, weighted_abs

f = eta_expand(EtaQuotient.parse("1:4,5:4"), 500, label="5.4.a")
print("a(1..10) =", f.coeffs[:10])
rep = hecke_check(f)
print("Hecke report:", rep.as_dict())
print("lambda(2)^2 - lambda(4) =", lam(f, 2) ** 2 - lam(f, 4))

###############################################################################
# Reduction: greedy Im-maximisation with Gamma_0(5) moves and the Fricke
# involution.  The reduced point satisfies both gap conditions and F is
# unchanged along the way.

z = 0.123 + 0.02j
rp = al_reduce(z, 5)
gap = check_gap(rp.z, 5)
print(f"{z} -> {rp.z.z:.6f} in {len(rp.word)} moves; "
      f"Im ok: {gap.im_ok}, min |cz+d|^2 = {gap.min_norm:.4f}")
print("F before/after:", weighted_abs(f, [z])[0], weighted_abs(f, [rp.z.z])[0])
print("Fricke operator W_5:", al_build(5, 5).integral)

###############################################################################
# Amplifier for 7.4.a with primes in [5, 10) coprime to 7.

g = get_form("7.4.a")
amp = amplifier(lambda n: lam(g, n), 5, 7)
print("primes:", amp.support.primes)
print("x:", dict(amp.x))
print("y:", dict(amp.y))
print("sum x_l lambda(l) =", amp_lower(lambda n: lam(g, n), amp.support),
      ">= |Lambda|/2 =", len(amp.support.primes) / 2)
