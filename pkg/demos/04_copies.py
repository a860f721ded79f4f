# How many copies separate the one-solution state from the no-solution state.
import math

from entsearch.copies import DistinguishabilityPoint, copies_required, delta_simulated, ratio_table

for n in (1, 2, 3, 6, 10):
    print(f"n={n:2d}  simulated overlap {delta_simulated(n, 0):.10f}  (L-1)/L {(2**n - 1) / 2**n:.10f}")

for row in ratio_table((10, 12, 14, 16, 18, 20)):
    print(f"L=2^{int(math.log2(row['L'])):2d}  N*={row['N']:8d}  N*/L={row['ratio']:.5f}  ln 2={row['limit']:.5f}")

print("L=N=1024:", DistinguishabilityPoint.at(1024, 1024))
print("N* for L=2^10, c=0.5:", copies_required(1024, 0.5))
