"""Two-input XOR as a game between four automata.

Prints the exact payoff matrix, marks the equilibria, then trains a small
machine and shows that its positive clauses settle on the same patterns.
"""
from fractions import Fraction

from frugaltm.datasets import xor_dataset
from frugaltm.game import XOR, accepted_equilibria, clause_expr, nash_equilibria, payoff_matrix, render
from frugaltm.machine import Machine, xor_config

m = payoff_matrix(XOR, Fraction(4))
print(render(m))
print("Nash rows:", sorted(nash_equilibria(m)))
print("accepted rows:", sorted(accepted_equilibria(m)), [m.clause_expr[r - 1] for r in sorted(accepted_equilibria(m))])

# below s = 2 an included automaton in a matching clause cannot earn a positive payoff
for s in (Fraction(2), Fraction(5, 2), Fraction(10)):
    print(f"s={s}: accepted {sorted(accepted_equilibria(payoff_matrix(XOR, s)))}")

machine = Machine(xor_config(seed=1))
fit = machine.fit(xor_dataset(), 50)
print(f"\ntrained 50 epochs, final train accuracy {fit.train_accuracy[-1]:.2f}")
acts = machine.actions()
for j in range(0, machine.config.U, 2):
    # literal order in the machine is x1, x2, ~x1, ~x2; the game uses x1, ~x1, x2, ~x2
    inc = acts[1, j]
    print(f"class 1 positive clause {j}:", clause_expr((inc[0], inc[2], inc[1], inc[3])))
