"""Learning events against accuracy on Iris.

Low s with high T spends many more reinforcement events per epoch and gets to
a good accuracy within the first few epochs.  The event totals stand in for
energy.
"""
from frugaltm.experiments import DatasetRef, EventCosts, SweepSpec, energy_proxy, run_sweep

res = run_sweep(SweepSpec(DatasetRef("iris"), [90], [4, 20], [1.2, 18.0], ensembles=5, epochs=10))
costs = EventCosts()
print(f"{'s':>5} {'T':>3} {'events/epoch':>12} {'proxy':>10} {'acc@3':>6} {'acc@10':>6}")
for c in res.cells:
    curve = c.mean_curve()
    print(f"{c.params['s']:5.1f} {c.params['T']:3d} {c.events_per_epoch():12.0f} "
          f"{energy_proxy(c.totals(), costs) / len(c.members):10.0f} {curve[2]:6.3f} {curve[-1]:6.3f}")
