"""Stuck-at faults and clause redundancy on XOR.

A bit-0 stuck-at-1 line on one automaton confines it to the odd states.  More
clauses or deeper automata give the rest of the machine room to compensate.
"""
from frugaltm.machine import FaultSite, Machine, xor_config
from frugaltm.datasets import xor_dataset
from frugaltm.experiments import run_fault_campaign
from frugaltm.trace import Trace, detect_convergence

fault = FaultSite.make(0, 1, 0, 1)

tr = Trace()
Machine(xor_config(seed=7, faults=(fault,))).fit(xor_dataset(), 50, trace=tr)
print("states visited by the faulted automaton:", sorted(detect_convergence(tr).visited_by(0, 0, 1)))

res = run_fault_campaign(xor_config(), [None, fault], [4, 8, 12], [6, 8, 10, 12], ensembles=30, epochs=50)
print()
print(f"{'axis':8} {'fault':22} {'U':>3} {'2n':>3} {'max acc':>8} {'runs at 1.0':>11} {'median epochs':>13}")
for c in res.cells:
    p = c.params
    full = sum(m.max_train == 1.0 for m in c.members)
    print(f"{p['axis']:8} {p['fault']:22} {p['U']:3d} {p['states']:3d} {c.max_train:8.2f} {full:11d} "
          f"{str(c.epochs_to_max()):>13}")
