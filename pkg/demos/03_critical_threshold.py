"""Locating the critical threshold on the n-cube.

The threshold is defined by chi(p_c) = lambda V^(1/3).  On a 10-cube this
takes roughly ten seconds; the largest cluster at p_c should be of order
V^(2/3).
"""
from hdtorus import TorusSpec
from hdtorus.percolation import estimate_cluster_stats
from hdtorus.threshold import find_pc, window_scan

spec = TorusSpec.ncube(10)
lam = 0.25
res = find_pc(spec, lam, mc_budget=5_000, seed=7)
print(f"target chi = {res.target:.3f}; p_c = {res.p_c:.6f} (p_c Omega = {res.p_c * spec.omega:.4f}) "
      f"after {len(res.evaluations)} evaluations, stop: {res.reason}")

st = estimate_cluster_stats(spec, res.p_c, 5_000, seed=7)
print(f"E|Cmax|(p_c) = {st.cmax_mean:.1f}, / V^(2/3) = {st.cmax_mean / spec.V ** (2 / 3):.4f}")

# a coarse window scan around p_c (p = p_c + eps / Omega)
print("\n   eps        p       chi     E|Cmax|")
for row in window_scan(spec, lam, [-1.0, -0.5, 0.0, 0.5, 1.0], 2_000, 7, p_c=res):
    flag = " (clamped)" if row.clamped else ""
    print(f"{row.epsilon:+6.2f}  {row.p:.5f}  {row.chi:8.2f}  {row.cmax:8.1f}{flag}")
