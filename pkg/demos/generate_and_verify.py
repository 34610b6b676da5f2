"""Generate random QPs with planted solutions and cross-check the solver.

The generator builds the certificate first: it draws a primal point, picks
which inequality rows are active, gives those rows positive multipliers,
and back-solves the linear cost so the triplet satisfies the first-order
conditions exactly. Every instance therefore ships with its own ground
truth, and an independent brute-force enumeration provides a second
opinion that does not share any code with the Newton solver.
"""

import numpy as np

from fbqp import (
    GeneratorSpec,
    active_set_solve,
    kkt_error,
    oracle_agrees,
    random_problem,
    solve,
)

spec = GeneratorSpec(n=6, p=1, q=5, activity_fraction=0.6, seed=42)
problem, planted = random_problem(spec)
print(f"generated {problem} with planted solution")
print(f"  planted z:          {np.round(planted.z, 4)}")
print(f"  planted active set: {tuple(map(int, np.flatnonzero(planted.v > 0)))}")
print(f"  planted KKT error:  {kkt_error(problem, planted).max_error():.2e}")

result = solve(problem)
oracle = active_set_solve(problem)
print(f"\nsolver:  {result.status.value} in {result.inner_iterations} steps, "
      f"max KKT {result.kkt.max_error():.2e}")
print(f"oracle:  {oracle.status.value}, active set {oracle.active_set}")
print(f"agreement at tol 1e-6: {oracle_agrees(problem, result, oracle)}")

# Scale up: a batch across sizes and activity levels.
print("\nbatch check, 60 problems across activity fractions:")
agree = 0
for i in range(60):
    rng = np.random.default_rng(1000 + i)
    batch_spec = GeneratorSpec(
        n=int(rng.integers(2, 9)),
        p=int(rng.integers(0, 3)),
        q=int(rng.integers(1, 7)),
        activity_fraction=float(rng.choice([0.0, 0.25, 0.5, 0.75, 1.0])),
        seed=1000 + i,
    )
    batch_problem, _ = random_problem(batch_spec)
    batch_result = solve(batch_problem)
    agree += oracle_agrees(batch_problem, batch_result)
print(f"  solver and oracle agree on {agree}/60")
