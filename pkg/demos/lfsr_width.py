"""How narrow can the random source be?

Each automaton draws its reinforcement decisions from its own LFSR.  Narrow
registers quantize the probabilities coarsely and repeat after 2^w - 1 draws.
"""
from frugaltm.experiments import DatasetRef, run_lfsr_study
from frugaltm.rng import RngStream

for w in (4, 8):
    s = RngStream.lfsr(w, 1)
    hits = sum(s.bernoulli(0.1) for _ in range(2**w - 1))
    print(f"lfsr:{w} over one period: P(draw < 0.1) = {hits}/{2**w - 1} = {hits / (2**w - 1):.3f}")

res = run_lfsr_study(DatasetRef("iris"), U=140, T=11, s=10.0, widths=[4, 5, 6, 7, 8, 12], ensembles=10,
                     epochs=30, regain_s=[4.0])
print()
for c in res.cells:
    print(f"{c.params['rng']:7} s={c.params['s']:<5} mean test accuracy {c.mean_test:.3f} +/- {c.std_test:.3f}")
