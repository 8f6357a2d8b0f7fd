"""Random-walk spectral sums on high-dimensional tori.

Computes the step distribution's Fourier transform, the random-walk
triangle sum beta and the infrared margin for a few tori, then shows how
beta * Omega evolves along the n-cube sequence.
"""
import numpy as np

from hdtorus import TorusSpec
from hdtorus.spectral import dhat, infrared_margin, rw_triangle_sums

# a Hamming graph, a nearest-neighbour torus and a spread-out torus
specs = [TorusSpec.from_dict({"family": "hamming", "r": 4, "n": 3}),
         TorusSpec.from_dict({"family": "nearest_neighbor", "r": 5, "n": 3}),
         TorusSpec.from_dict({"family": "spread_out", "r": 7, "n": 2, "L": 1})]

for spec in specs:
    D = dhat(spec)
    t = rw_triangle_sums(spec, 1 / spec.omega, D)
    m = infrared_margin(spec, D)
    print(f"{spec}: V={spec.V} Omega={spec.omega}")
    print(f"  D_hat range [{D.min():+.4f}, {D.max():+.4f}]  beta={t.beta_triangle:.6f}  "
          f"infrared margin={m.margin:.4f}")

# beta * Omega on the n-cube: rises, peaks near n = 9, then decays like 1/Omega
print("\n n   beta*Omega")
for n in range(5, 17):
    spec = TorusSpec.ncube(n)
    print(f"{n:2d}   {rw_triangle_sums(spec, 1 / n).beta_triangle * n:8.4f}")
