"""Compilation of a descriptor problem to an unconstrained quadratic binary form.

Variables, in id order: assignment bits x (cluster-major, then tag), coverage
indicator bits z (one per object), then three slack families that turn the
inequality constraints into exactly-satisfiable equalities:

  * link slacks, per object: an object may claim coverage only if its
    cluster's descriptor intersects its tag set;
  * quota slacks, per cluster: at least the target number of objects claim
    coverage;
  * disjoint slacks, per tag: a tag sits in at most one descriptor.

Each equality residual is squared and weighted (A, B, C); the modularity
term is quadratic in x already. Binary identities (b^2 = b) fold diagonal
contributions into linear coefficients, so the stored form has diagonal
entries as linear weights and combined upper-triangular off-diagonals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .instance import edge_count
from .model import DegenerateInstanceError, DescriptorSolution, ProblemSpec, coverage


def slack_coefficients(range_max: int) -> list[int]:
    """Binary-expansion coefficients whose subset sums cover 0..range_max.

    The pattern is a power-of-two prefix closed by range_max + 1 - 2^(m-1)
    with m = ceil(log2(range_max + 1)) bits, so every value in the range is
    representable and none outside it.
    """
    if range_max < 0:
        raise ValueError("range_max must be >= 0")
    if range_max == 0:
        return []
    m = int(range_max + 1).bit_length() - 1
    if (1 << m) < range_max + 1:
        m += 1
    # m == ceil(log2(range_max + 1)), and m >= 1 here
    return [1 << b for b in range(m - 1)] + [range_max + 1 - (1 << (m - 1))]


@dataclass(frozen=True)
class VariableIndex:
    """Deterministic contiguous variable ids for one compiled model."""

    k: int
    n_tags: int
    n_objects: int
    link_offsets: tuple[int, ...]
    link_counts: tuple[int, ...]
    quota_offsets: tuple[int, ...]
    quota_counts: tuple[int, ...]
    disjoint_offset: int
    total: int

    @classmethod
    def build(cls, k: int, n_tags: int, n_objects: int,
              link_counts: list[int], quota_counts: list[int]) -> "VariableIndex":
        pos = k * n_tags + n_objects
        link_offsets = []
        for c in link_counts:
            link_offsets.append(pos)
            pos += c
        quota_offsets = []
        for c in quota_counts:
            quota_offsets.append(pos)
            pos += c
        disjoint_offset = pos
        pos += n_tags
        return cls(k, n_tags, n_objects, tuple(link_offsets), tuple(link_counts),
                   tuple(quota_offsets), tuple(quota_counts), disjoint_offset, pos)

    def x(self, ell: int, j: int) -> int:
        """Assignment bit for tag j in the descriptor of 0-based cluster ell."""
        return ell * self.n_tags + j

    def z(self, i: int) -> int:
        return self.k * self.n_tags + i

    def link_slack(self, i: int, b: int) -> int:
        return self.link_offsets[i] + b

    def quota_slack(self, ell: int, b: int) -> int:
        return self.quota_offsets[ell] + b

    def disjoint_slack(self, j: int) -> int:
        return self.disjoint_offset + j

    def label(self, var: int) -> str:
        """Human-readable name for a variable id."""
        nx = self.k * self.n_tags
        if var < nx:
            return f"x[c{var // self.n_tags + 1},t{var % self.n_tags}]"
        if var < nx + self.n_objects:
            return f"z[o{var - nx}]"
        if var >= self.disjoint_offset:
            return f"disjoint_slack[t{var - self.disjoint_offset}]"
        for i, (off, cnt) in enumerate(zip(self.link_offsets, self.link_counts)):
            if off <= var < off + cnt:
                return f"link_slack[o{i},b{var - off}]"
        for ell, (off, cnt) in enumerate(zip(self.quota_offsets, self.quota_counts)):
            if off <= var < off + cnt:
                return f"quota_slack[c{ell + 1},b{var - off}]"
        raise IndexError(f"variable id {var} out of range")


@dataclass(frozen=True)
class PenaltyWeights:
    A: float
    B: float
    C: float
    P: float


@dataclass
class QuboModel:
    """Upper-triangular quadratic form with constant offset.

    Diagonal entries of `coefficients` are linear weights; off-diagonal keys
    always have i < j. Treated as immutable after construction. Models built
    from a problem spec carry the spec, index and slack layouts needed for
    decoding; hand-built raw models may leave those as None.
    """

    n_vars: int
    coefficients: dict[tuple[int, int], float]
    constant: float
    penalties: PenaltyWeights | None = None
    index: VariableIndex | None = None
    spec: ProblemSpec | None = None
    link_coeffs: tuple[tuple[int, ...], ...] | None = None
    quota_coeffs: tuple[tuple[int, ...], ...] | None = None

    _dense: tuple[np.ndarray, np.ndarray] | None = field(
        default=None, init=False, repr=False, compare=False)

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """(linear diag vector, symmetric off-diagonal matrix with zero diag)."""
        if self._dense is None:
            diag = np.zeros(self.n_vars)
            qmat = np.zeros((self.n_vars, self.n_vars))
            for (i, j), v in self.coefficients.items():
                if i == j:
                    diag[i] += v
                else:
                    qmat[i, j] += v
                    qmat[j, i] += v
            self._dense = (diag, qmat)
        return self._dense


def default_penalties(spec: ProblemSpec) -> tuple[float, float, float]:
    """Uniform weights making one unit of constraint violation cost more than
    the whole attainable objective range (tag count plus maximum modularity)."""
    inst = spec.instance
    val = 2.0 * (1.0 + inst.n_tags + spec.modularity_weight * edge_count(inst) / 2.0)
    return (val, val, val)


def build_qubo(spec: ProblemSpec, A: float, B: float, C: float) -> QuboModel:
    """Compile `spec` into a quadratic model whose minimum over zero-penalty
    assignments equals the direct objective of the decoded solution.

    Raises:
        DegenerateInstanceError: modularity weight > 0 on an instance with
            no associations.
    """
    if min(A, B, C) <= 0:
        raise ValueError("penalty weights A, B, C must be positive")
    inst = spec.instance
    k, n_tags, n = inst.k, inst.n_tags, inst.n
    P = spec.modularity_weight
    m_edges = edge_count(inst)
    if P > 0 and m_edges == 0:
        raise DegenerateInstanceError("modularity term undefined: instance has no associations")

    link_coeffs = [slack_coefficients(len(ts)) for ts in inst.tags_of]
    quota_coeffs = [
        slack_coefficients(size - target)
        for size, target in zip(inst.cluster_sizes, spec.coverage_targets)
    ]
    index = VariableIndex.build(k, n_tags, n,
                                [len(c) for c in link_coeffs],
                                [len(c) for c in quota_coeffs])

    coeffs: dict[tuple[int, int], float] = {}
    constant = 0.0

    def add(i: int, j: int, v: float):
        if v == 0.0:
            return
        key = (i, j) if i <= j else (j, i)
        coeffs[key] = coeffs.get(key, 0.0) + v

    def add_squared(terms: list[tuple[int, float]], d: float, weight: float):
        # weight * (sum(c_t * b_t) + d)^2 with b_t binary
        nonlocal constant
        for t, (var, c) in enumerate(terms):
            add(var, var, weight * (c * c + 2.0 * d * c))
            for var2, c2 in terms[t + 1:]:
                add(var, var2, weight * 2.0 * c * c2)
        constant += weight * d * d

    # objective: one unit per selected tag
    for ell in range(k):
        for j in range(n_tags):
            add(index.x(ell, j), index.x(ell, j), 1.0)

    # modularity: degree products over same-descriptor ordered tag pairs
    if P > 0:
        degrees = inst._tag_degrees
        scale = P / (2.0 * m_edges)
        for ell in range(k):
            for v in range(n_tags):
                if degrees[v] == 0:
                    continue
                add(index.x(ell, v), index.x(ell, v), scale * degrees[v] * degrees[v])
                for w in range(v + 1, n_tags):
                    if degrees[w] == 0:
                        continue
                    add(index.x(ell, v), index.x(ell, w), 2.0 * scale * degrees[v] * degrees[w])

    # link constraints: z_i - sum of x over the object's tags + slack = 0
    for i, (c, ts) in enumerate(zip(inst.cluster_of, inst.tags_of)):
        terms = [(index.z(i), 1.0)]
        terms += [(index.x(c - 1, j), -1.0) for j in sorted(ts)]
        terms += [(index.link_slack(i, b), float(cf)) for b, cf in enumerate(link_coeffs[i])]
        add_squared(terms, 0.0, A)

    # quota constraints: target - sum of z over the cluster + slack = 0
    for ell in range(k):
        terms = [(index.z(i), -1.0) for i in inst.members(ell + 1)]
        terms += [(index.quota_slack(ell, b), float(cf)) for b, cf in enumerate(quota_coeffs[ell])]
        add_squared(terms, float(spec.coverage_targets[ell]), B)

    # disjointness: sum over clusters of x + slack - 1 = 0, per tag
    for j in range(n_tags):
        terms = [(index.x(ell, j), 1.0) for ell in range(k)]
        terms.append((index.disjoint_slack(j), 1.0))
        add_squared(terms, -1.0, C)

    return QuboModel(index.total, coeffs, constant,
                     PenaltyWeights(float(A), float(B), float(C), float(P)),
                     index, spec,
                     tuple(tuple(c) for c in link_coeffs),
                     tuple(tuple(c) for c in quota_coeffs))


def energy(model: QuboModel, bits) -> float:
    """Quadratic form value plus constant for one bit assignment."""
    b = np.asarray(bits)
    if b.shape != (model.n_vars,):
        raise ValueError(f"expected {model.n_vars} bits, got shape {b.shape}")
    total = model.constant
    for (i, j), v in model.coefficients.items():
        if b[i] and b[j]:
            total += v
    return float(total)


@dataclass(frozen=True)
class ResidualReport:
    """Raw equality residuals per constraint, the weighted penalty total, and
    where the coverage bits disagree with actual coverage."""

    link_residuals: tuple[float, ...]
    quota_residuals: tuple[float, ...]
    disjoint_residuals: tuple[float, ...]
    penalty: float
    z_overclaims: tuple[int, ...]   # z set but the object is not covered
    z_underclaims: tuple[int, ...]  # z clear but the object is covered

    @property
    def clean(self) -> bool:
        return self.penalty == 0.0


def decode(model: QuboModel, bits) -> tuple[DescriptorSolution, ResidualReport]:
    """Read descriptors off the assignment bits and report every residual.

    Never rejects constraint-violating bits; violations show up as nonzero
    residuals and in the feasibility check of the decoded solution.
    """
    if model.index is None or model.spec is None:
        raise ValueError("model carries no variable index; was it built from a spec?")
    b = np.asarray(bits).astype(np.int64)
    if b.shape != (model.n_vars,):
        raise ValueError(f"expected {model.n_vars} bits, got shape {b.shape}")
    idx, spec = model.index, model.spec
    inst = spec.instance

    sol = DescriptorSolution(tuple(
        frozenset(j for j in range(inst.n_tags) if b[idx.x(ell, j)])
        for ell in range(inst.k)))

    link = []
    for i, (c, ts) in enumerate(zip(inst.cluster_of, inst.tags_of)):
        r = float(b[idx.z(i)]) - sum(b[idx.x(c - 1, j)] for j in ts)
        r += sum(cf * b[idx.link_slack(i, bb)] for bb, cf in enumerate(model.link_coeffs[i]))
        link.append(r)
    quota = []
    for ell in range(inst.k):
        r = float(spec.coverage_targets[ell]) - sum(b[idx.z(i)] for i in inst.members(ell + 1))
        r += sum(cf * b[idx.quota_slack(ell, bb)] for bb, cf in enumerate(model.quota_coeffs[ell]))
        quota.append(r)
    disjoint = []
    for j in range(inst.n_tags):
        r = sum(b[idx.x(ell, j)] for ell in range(inst.k)) + float(b[idx.disjoint_slack(j)]) - 1.0
        disjoint.append(r)

    w = model.penalties
    penalty = (w.A * sum(r * r for r in link)
               + w.B * sum(r * r for r in quota)
               + w.C * sum(r * r for r in disjoint))

    over, under = [], []
    for i, (c, ts) in enumerate(zip(inst.cluster_of, inst.tags_of)):
        covered = bool(ts & sol.descriptors[c - 1])
        if b[idx.z(i)] and not covered:
            over.append(i)
        elif not b[idx.z(i)] and covered:
            under.append(i)

    return sol, ResidualReport(tuple(link), tuple(quota), tuple(disjoint),
                               float(penalty), tuple(over), tuple(under))


def _slack_bits(coeffs, value: int) -> list[int]:
    """Bit pattern over `coeffs` summing exactly to `value` (must be in range)."""
    if not coeffs:
        if value != 0:
            raise ValueError(f"no slack bits available for value {value}")
        return []
    bits = [0] * len(coeffs)
    prefix_max = (1 << (len(coeffs) - 1)) - 1
    if value > prefix_max:
        bits[-1] = 1
        value -= coeffs[-1]
    for b in range(len(coeffs) - 2, -1, -1):
        if value >= coeffs[b]:
            bits[b] = 1
            value -= coeffs[b]
    if value != 0:
        raise ValueError("slack value not representable")
    return bits


def encode_solution(model: QuboModel, sol: DescriptorSolution) -> np.ndarray:
    """Bit vector for `sol` with coverage bits set exactly for covered objects
    and slacks chosen to zero every satisfied residual.

    For a feasible solution the result has zero penalty and its energy equals
    the direct objective. Unsatisfiable residuals (infeasible input) get the
    nearest representable slack value.
    """
    if model.index is None or model.spec is None:
        raise ValueError("model carries no variable index; was it built from a spec?")
    idx, spec = model.index, model.spec
    inst = spec.instance
    bits = np.zeros(model.n_vars, dtype=np.uint8)

    for ell, d in enumerate(sol.descriptors):
        for j in d:
            bits[idx.x(ell, j)] = 1

    covered = coverage(spec, sol)
    for i, (c, ts) in enumerate(zip(inst.cluster_of, inst.tags_of)):
        hit = len(ts & sol.descriptors[c - 1])
        z = 1 if hit else 0
        bits[idx.z(i)] = z
        want = hit - z  # zeroes z - sum(x) + slack
        want = max(0, min(want, len(ts)))
        for b, v in enumerate(_slack_bits(model.link_coeffs[i], want)):
            bits[idx.link_slack(i, b)] = v

    for ell in range(inst.k):
        room = inst.cluster_sizes[ell] - spec.coverage_targets[ell]
        want = covered[ell] - spec.coverage_targets[ell]
        want = max(0, min(want, room))
        for b, v in enumerate(_slack_bits(model.quota_coeffs[ell], want)):
            bits[idx.quota_slack(ell, b)] = v

    for j in range(inst.n_tags):
        used = sum(1 for d in sol.descriptors if j in d)
        bits[idx.disjoint_slack(j)] = 1 if used == 0 else 0

    return bits


def export_qubo(model: QuboModel, stream) -> None:
    """Sparse text export: header `n_vars constant`, then `i j value` lines
    with i <= j, for hand-off to external minimizers."""
    stream.write(f"{model.n_vars} {model.constant!r}\n")
    for (i, j) in sorted(model.coefficients):
        stream.write(f"{i} {j} {model.coefficients[(i, j)]!r}\n")
