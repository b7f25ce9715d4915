"""Sparse recovery in l1(N), walked through on a two-functional instance.

The measurements are the harmonic sequence [1/k] and the alternating
geometric sequence [(-1/2)**(k-1)], both in c0(N), with data y = [1, 1].
The dual problem maximizes c . y over combinations with sup norm one;
its solution set here is a whole segment, and the choice of dual point
changes how tightly the attainment set localizes the solution:

* the selection c = [-1/2, 3/2] attains its sup norm at coordinates
  {1, 2}, giving a 2-column truncation matrix of rank 2;
* the selection c = [0, 1] attains only at {1}, rank 1.

Either way basis pursuit on the attainment columns recovers the unique
minimum-norm interpolant: a single atom of weight 1 at coordinate 1.
"""

import numpy as np

import rkbs_sparse as rk

problem = rk.seq_problem([rk.harmonic(), rk.geometric(-0.5)], [1.0, 1.0])

print("=== dual problem ===")
cert = rk.dual_solve_l1(problem)
print(f"optimal value m0          : {cert.value:.12g}")
print(f"solver vertex c           : {np.round(cert.coefficient_vector(), 12)}")
print(f"certified truncation      : {cert.truncation_used} coordinates")
print(f"attainment margin         : {cert.margin:.3g}")
print("the dual optimum is not unique: every c with c1 + c2 = 1 and")
print("-1/2 <= c1 <= 3/2 is a solution\n")

print("=== two dual selections, two sparsity bounds ===")
for coeffs in ([-0.5, 1.5], [0.0, 1.0]):
    sel = rk.certificate_from_coefficients(problem, coeffs)
    V = rk.truncation_matrix(problem.functionals, sel.attainment)
    print(f"c = {coeffs}")
    print(f"  attainment set N  : {list(sel.attainment)}")
    print(f"  truncation matrix : {V.array.tolist()}")
    print(f"  rank (atom bound) : {V.rank}")

print("\nthe minimal-attainment pass finds the second selection on its own:")
cert_min = rk.dual_solve_l1(problem, minimal_attainment=True)
print(f"  c = {np.round(cert_min.coefficient_vector(), 12)}, "
      f"attainment {list(cert_min.attainment)}\n")

print("=== primal recovery ===")
sol = rk.mni_solve_l1(problem)
print(f"atoms (site, weight)      : {list(sol.atoms)}")
print(f"l1 norm                   : {sol.norm:.12g}  (= m0, strong duality)")
print(f"interpolation residual    : {sol.residual:.3g}")

print("\n=== independent audits ===")
V = rk.truncation_matrix(problem.functionals,
                         rk.certificate_from_coefficients(problem, [-0.5, 1.5]).attainment)
enum = rk.vertex_enumerate_l1(V.array, problem.y_vector(), candidate_value=sol.norm)
print(f"vertex enumeration value  : {enum.value:.12g}  agreement={enum.agreement}")
pairing = rk.norming_check(cert, sol, tol=1e-9)
print(f"norming pairing gap       : {pairing.value:.3g}  agreement={pairing.agreement}")
