"""Integer-lattice geometry: ball enumeration, wedge norms, signed-permutation orbits.

Everything downstream (cutoff sums, symmetry-reduced searches, tail certificates)
sits on top of three primitives defined here:

* enumeration of the open lattice ball {h in Z^d \\ {0} : |h| < rho} with an exact,
  type-independent boundary rule,
* the squared wedge norm |p ^ q|^2 = |p|^2 |q|^2 - (p.q)^2, and
* the canonical representative of a vector under the group generated by coordinate
  sign flips and permutations (the symmetry group of all the lattice sums).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterator

import numpy as np

LatticeVector = tuple[int, ...]

#: Hard cap on the number of candidate cube points an enumeration may visit.
DEFAULT_POINT_BUDGET = 80_000_000


class PointBudgetExceeded(RuntimeError):
    """Ball enumeration would visit more candidate points than the budget allows."""


def max_norm_sq_inside(rho) -> int:
    """Largest integer m with m < rho**2, computed exactly.

    The radius may be an int, Fraction, or float; floats are interpreted at their
    exact binary value, so the strict comparison |h|^2 < rho^2 is deterministic
    for every input type and never suffers a rounding tie.
    """
    rsq = Fraction(rho) ** 2
    return math.ceil(rsq) - 1


@dataclass(eq=False)
class BallEnumeration:
    """All nonzero integer vectors strictly inside a sphere, in lexicographic order.

    points is an (N, d) int64 array whose rows are sorted lexicographically;
    the array is frozen after construction and safe to share between threads.
    """

    radius: object
    points: np.ndarray

    def __post_init__(self):
        self.points.setflags(write=False)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @cached_property
    def norm_sq(self) -> np.ndarray:
        """|h|^2 for each point, exact int64, aligned with points rows."""
        ns = np.einsum("ij,ij->i", self.points, self.points)
        ns.setflags(write=False)
        return ns

    @cached_property
    def by_norm_sq(self) -> dict[int, np.ndarray]:
        """Map from each attained |h|^2 to the (sorted) row indices attaining it."""
        ns = self.norm_sq
        order = np.argsort(ns, kind="stable")
        svals = ns[order]
        uniq, starts = np.unique(svals, return_index=True)
        ends = list(starts[1:]) + [len(ns)]
        return {
            int(v): np.sort(order[s:e]) for v, s, e in zip(uniq, starts, ends)
        }

    def vectors(self) -> Iterator[LatticeVector]:
        for row in self.points.tolist():
            yield tuple(row)


def enumerate_ball(d: int, rho, *, budget: int = DEFAULT_POINT_BUDGET) -> BallEnumeration:
    """Enumerate every nonzero h in Z^d with |h| < rho, exactly once, in lex order.

    Raises PointBudgetExceeded when the bounding cube holds more than `budget`
    candidates (the check happens before any allocation, so an oversized radius
    fails fast instead of exhausting memory).
    """
    if d < 2:
        raise ValueError(f"requires d >= 2, got d={d}")
    if rho <= 0:
        raise ValueError(f"requires rho > 0, got rho={rho}")
    m = max_norm_sq_inside(rho)
    if m < 1:
        return BallEnumeration(radius=rho, points=np.empty((0, d), dtype=np.int64))
    c = math.isqrt(m)
    side = 2 * c + 1
    if side**d > budget:
        raise PointBudgetExceeded(
            f"ball d={d}, rho={rho} needs {side ** d} cube candidates, budget is {budget}"
        )
    if d * c * c >= 2**62:
        raise ValueError(f"rho={rho} too large: |h|^2 would overflow the int64 fast path")

    axis = np.arange(-c, c + 1, dtype=np.int64)
    if d == 2:
        rest = axis.reshape(-1, 1)
    else:
        grids = np.meshgrid(*([axis] * (d - 1)), indexing="ij")
        rest = np.stack(grids, axis=-1).reshape(-1, d - 1)
    rest_sq = np.einsum("ij,ij->i", rest, rest)

    chunks = []
    for x in axis.tolist():
        keep = rest_sq <= m - x * x
        if not keep.any():
            continue
        block = rest[keep]
        first = np.full((block.shape[0], 1), x, dtype=np.int64)
        chunks.append(np.hstack([first, block]))
    pts = np.vstack(chunks) if chunks else np.empty((0, d), dtype=np.int64)
    pts = pts[np.any(pts != 0, axis=1)]
    return BallEnumeration(radius=rho, points=pts)


@lru_cache(maxsize=3)
def shared_ball(d: int, rho, budget: int = DEFAULT_POINT_BUDGET) -> BallEnumeration:
    """Cached enumerate_ball for hashable radii; used for large repeated enumerations."""
    return enumerate_ball(d, rho, budget=budget)


def wedge_norm_sq(p, q) -> float:
    """|p|^2 |q|^2 - (p.q)^2, clamped at 0 against rounding.

    Equals the squared area of the parallelogram spanned by p and q.
    """
    pa = np.asarray(p, dtype=float)
    qa = np.asarray(q, dtype=float)
    val = pa.dot(pa) * qa.dot(qa) - pa.dot(qa) ** 2
    return float(max(val, 0.0))


def canonical_representative(k) -> LatticeVector:
    """Sorted-descending absolute values of k: the orbit representative under
    coordinate sign flips and permutations. Rejects the zero vector."""
    kt = tuple(int(x) for x in k)
    if not any(kt):
        raise ValueError("zero vector has no canonical representative")
    return tuple(sorted((abs(x) for x in kt), reverse=True))


def is_canonical(k) -> bool:
    kt = tuple(int(x) for x in k)
    return all(a >= b for a, b in zip(kt, kt[1:])) and (not kt or kt[-1] >= 0)


def orbit_size(k_canonical) -> int:
    """Number of distinct signed-permutation images of a canonical vector.

    Equals d!/(prod of multiplicities!) * 2^(number of nonzero coordinates).
    """
    kt = tuple(int(x) for x in k_canonical)
    if not is_canonical(kt) or not any(kt):
        raise ValueError(f"{kt} is not a nonzero canonical representative")
    perms = math.factorial(len(kt))
    for mult in Counter(kt).values():
        perms //= math.factorial(mult)
    signs = 2 ** sum(1 for x in kt if x != 0)
    return perms * signs


def enumerate_canonical(d: int, radius) -> list[LatticeVector]:
    """All nonzero canonical representatives with |k| < radius, sorted lexicographically.

    These index the orbits of the signed-permutation group inside the open ball;
    the search over sup K_m only ever evaluates these.
    """
    if d < 2:
        raise ValueError(f"requires d >= 2, got d={d}")
    m = max_norm_sq_inside(radius)
    out: list[LatticeVector] = []
    vec = [0] * d

    def rec(pos: int, prev: int, room: int) -> None:
        if pos == d:
            out.append(tuple(vec))
            return
        top = min(prev, math.isqrt(room))
        for v in range(top, -1, -1):
            vec[pos] = v
            rec(pos + 1, v, room - v * v)

    if m >= 1:
        rec(0, math.isqrt(m), m)
        out.remove((0,) * d)
    out.sort()
    return out


def signed_permutations(k) -> set[LatticeVector]:
    """The full orbit of k under coordinate sign flips and permutations."""
    from itertools import permutations, product

    kt = tuple(int(x) for x in k)
    orbit = set()
    for perm in permutations(kt):
        nz = [i for i, x in enumerate(perm) if x != 0]
        for signs in product((1, -1), repeat=len(nz)):
            img = list(perm)
            for i, s in zip(nz, signs):
                img[i] = s * img[i]
            orbit.add(tuple(img))
    return orbit
