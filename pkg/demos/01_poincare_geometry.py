#!/usr/bin/env python3
"""A tour of the Poincaré-ball operations.

Points live in the open ball {x : c ||x||^2 < 1}; gyrovector addition plays
the role of vector addition, and the exp/log maps at the origin translate
between the ball and its Euclidean tangent space.
"""

import numpy as np

from shgcn import (
    PoincarePoint,
    TangentVector,
    exp0,
    log0,
    lorentz_dist0,
    lorentz_exp0,
    mobius_add,
    mobius_matvec,
    mobius_scalar_mul,
    poincare_dist,
    project,
)

c = 1.0
x = PoincarePoint([0.5, 0.0], c)
y = PoincarePoint([0.5, 0.0], c)

print("== gyrovector addition ==")
print("x (+) y            :", mobius_add(x, y).coords, " (exact value 0.8)")
origin = PoincarePoint([0.0, 0.0], c)
print("x (+) 0            :", mobius_add(x, origin).coords)

print()
print("== exp/log maps at the origin ==")
v = TangentVector([1.0, 0.0], c)
p = exp0(v)
print("exp0([1, 0])       :", p.coords, " (= tanh 1 along e1)")
print("log0(exp0(v))      :", log0(p).coords, " (recovers v)")

print()
print("== distances grow fast near the boundary ==")
for r in (0.5, 0.9, 0.99, 0.999, 0.9999):
    d = poincare_dist(origin, PoincarePoint([r, 0.0], c))
    print(f"  d(0, {r:7.4f} e1) = {d:7.4f}")

print()
print("== matrix action via the tangent space ==")
doubled = mobius_matvec(2.0 * np.eye(2), PoincarePoint([np.tanh(0.5), 0.0], c))
print("2 (x) tanh(0.5) e1 :", doubled.coords, " (= tanh 1 along e1)")
print("1 (x) x            :", mobius_scalar_mul(1.0, x).coords)

print()
print("== projection clips only what leaks out ==")
print("project([0.5, 0])  :", project([0.5, 0.0], c).coords)
print("project([2.0, 0])  :", project([2.0, 0.0], c).coords)

print()
print("== the Lorentz model tells the same story ==")
w = np.array([1.5, 0.0, 0.5])
q = lorentz_exp0(w, K=1.0)
print("hyperboloid point  :", q.coords)
print("distance to pole   :", lorentz_dist0(q), " (= ||w|| =", np.linalg.norm(w), ")")
