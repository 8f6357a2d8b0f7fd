"""Diagrammatic quantities and the bootstrap function below p_c.

Estimates tau on an 8-cube, checks the triangle condition against the
random-walk triangle, then evaluates the bootstrap function f and the
ratio tau_hat / C_hat_{m_p} at a few sub-critical densities.
"""
from hdtorus import TorusSpec
from hdtorus.bootstrap import bootstrap_f, tau_asymptotics_check
from hdtorus.diagrams import check_triangle_condition, triangle, triangle_stderr
from hdtorus.percolation import estimate_observables
from hdtorus.spectral import dft, rw_triangle_sums
from hdtorus.threshold import find_pc

spec = TorusSpec.ncube(8)
lam = 1.0  # V^(1/3) is small here, so a larger lambda keeps the mu ceiling positive
p_c = find_pc(spec, lam, mc_budget=4_000, seed=3).p_c
beta = rw_triangle_sums(spec, 1 / spec.omega).beta_triangle
print(f"p_c = {p_c:.5f}  beta = {beta:.5f}")

for frac in (0.5, 0.9, 1.0):
    p = frac * p_c
    est, st = estimate_observables(spec, p, 4_000, seed=3)
    nab = triangle(est.tau, spec)
    chk = check_triangle_condition(nab, beta, st.chi, spec.V,
                                   slack=4 * triangle_stderr(est.tau, est.stderr, spec))
    tau_hat = dft(est.tau, spec)
    rep = bootstrap_f(tau_hat, p, spec, lam, tau_stderr=est.stderr)
    ratio = tau_asymptotics_check(tau_hat, p, p_c, lam, spec)
    print(f"p = {frac:.1f} p_c: chi={st.chi:7.2f}  triangle ok={chk.ok}  "
          f"f={rep.f:.4f} (f1={rep.f1:.3f} f2={rep.f2:.3f} f3={rep.f3:.3f})  "
          f"ratio max dev={ratio.max_dev:.4f}")
