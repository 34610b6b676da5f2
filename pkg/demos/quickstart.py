"""Solve a small box-constrained QP and inspect the result.

The problem projects the point c = (2, -1) onto the unit box [0, 1]^2:

    minimize    0.5 ||z||^2 - (2, -1)' z
    subject to   z <= 1   (rows 1, 2)
                -z <= 0   (rows 3, 4)

Both coordinates end up pinned: z* = (1, 0), with multipliers on the
upper bound of z1 and the lower bound of z2.
"""

import numpy as np

from fbqp import QpProblem, active_set_solve, oracle_agrees, solve

problem = QpProblem(
    H=np.eye(2),
    f=np.array([-2.0, 1.0]),
    A=np.vstack((np.eye(2), -np.eye(2))),
    b=np.array([1.0, 1.0, 0.0, 0.0]),
)

result = solve(problem)
print(f"status:      {result.status.value}")
print(f"z:           {result.iterate.z}")
print(f"v:           {result.iterate.v}")
print(f"objective:   {problem.objective(result.iterate.z):.6f}")
print(f"iterations:  {result.inner_iterations} Newton steps, "
      f"{result.outer_iterations} continuation stages")

print("\nKKT certificate (computed without any regularization):")
for name, value in result.kkt.as_dict().items():
    print(f"  {name:18s} {value:.3e}")

print("\nconvergence trace:")
print(f"  {'stage':>5s} {'step':>4s} {'sigma':>9s} {'merit':>12s} {'kkt':>10s}")
for record in result.trace:
    print(f"  {record.outer:5d} {record.inner:4d} {record.sigma:9.1e} "
          f"{record.merit:12.3e} {record.kkt_max:10.2e}")

# An independent check: enumerate every candidate active set.
oracle = active_set_solve(problem)
print(f"\noracle active set: {oracle.active_set}, "
      f"objective {oracle.objective:.6f}")
print(f"solver matches oracle: {oracle_agrees(problem, result, oracle)}")
