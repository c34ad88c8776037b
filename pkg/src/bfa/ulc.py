"""Unique-label-cover instances, brute-force optimum, the long-code
reduction to sampled MAX-CSP, dictatorship completeness, and the
influence-decoding extractor.

Labels are 0-indexed here and in the JSON formats.  An edge (u, v) with
permutation pi is satisfied by a labelling l when l(u) = pi(l(v)).
Composition reads (x o pi)_j = x_{pi(j)}, so a dictator DICT_{l(v)}
composed along a satisfied edge becomes DICT_{l(u)}.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import RealTable, Table, TruthTable, table_values, wht
from .operators import McReport, mc_report, noisy_influence_profile, stability
from .rng import bernoulli_masks, substream, uniform_masks
from .testers import nae_query_masks

BRUTE_FORCE_CAP = 10**8
MAX_REDUCE_LABELS = 10

Assignment = list  # one TruthTable or RealTable on L variables per vertex


@dataclass(frozen=True, eq=False)
class UlcInstance:
    L: int
    num_vertices: int
    edges: tuple  # ((u, v), ...)
    perms: tuple  # per edge, a tuple of length L: perm[j] = pi(j)

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("need at least one label")
        if self.num_vertices < 2 or not self.edges:
            raise ValueError("degenerate instance: need vertices and edges")
        if len(self.perms) != len(self.edges):
            raise ValueError("one permutation per edge")
        degrees = np.zeros(self.num_vertices, dtype=np.int64)
        for (u, v), perm in zip(self.edges, self.perms):
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise ValueError("edge endpoint out of range")
            if sorted(perm) != list(range(self.L)):
                raise ValueError("edge constraint must be a bijection on labels")
            degrees[u] += 1
            degrees[v] += 1
        if degrees.min() != degrees.max():
            raise ValueError("instance graph must be regular")

    @property
    def degree(self) -> int:
        return 2 * len(self.edges) // self.num_vertices

    def adjacency(self) -> list[list[tuple[int, tuple]]]:
        """Per vertex: (neighbor, permutation oriented so that
        l(self) = perm(l(neighbor)) satisfies the edge)."""
        adj: list[list[tuple[int, tuple]]] = [[] for _ in range(self.num_vertices)]
        for (u, v), perm in zip(self.edges, self.perms):
            inverse = tuple(int(j) for j in np.argsort(np.asarray(perm)))
            adj[u].append((v, tuple(perm)))
            adj[v].append((u, inverse))
        return adj

    def to_json(self) -> str:
        return json.dumps(
            {
                "L": self.L,
                "vertices": self.num_vertices,
                "edges": [
                    {"u": u, "v": v, "perm": list(perm)}
                    for (u, v), perm in zip(self.edges, self.perms)
                ],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "UlcInstance":
        blob = json.loads(text)
        edges = tuple((e["u"], e["v"]) for e in blob["edges"])
        perms = tuple(tuple(e["perm"]) for e in blob["edges"])
        return cls(blob["L"], blob["vertices"], edges, perms)


def labelling_value(psi: UlcInstance, labels: np.ndarray) -> float:
    """Fraction of edges satisfied by a labelling."""
    labels = np.asarray(labels)
    hits = sum(
        1
        for (u, v), perm in zip(psi.edges, psi.perms)
        if labels[u] == perm[labels[v]]
    )
    return hits / len(psi.edges)


def has_perfect_labelling(psi: UlcInstance):
    """Breadth-first label propagation; a witness labelling or None.

    Fixing one label on a component forces every other label along edges,
    so perfect satisfiability is decidable with L root choices per component.
    """
    adj = psi.adjacency()
    labels = np.full(psi.num_vertices, -1, dtype=np.int64)
    for root in range(psi.num_vertices):
        if labels[root] != -1:
            continue
        component = _component(adj, root)
        for start in range(psi.L):
            trial = _propagate(psi, adj, root, start, component)
            if trial is not None:
                for w in component:
                    labels[w] = trial[w]
                break
        else:
            return None
    return labels


def _component(adj, root):
    seen = {root}
    frontier = [root]
    while frontier:
        w = frontier.pop()
        for nbr, _ in adj[w]:
            if nbr not in seen:
                seen.add(nbr)
                frontier.append(nbr)
    return sorted(seen)


def _propagate(psi, adj, root, start, component):
    trial = {root: start}
    frontier = [root]
    while frontier:
        w = frontier.pop()
        for nbr, perm in adj[w]:
            # oriented so l(w) = perm(l(nbr)): deduce l(nbr) = perm^-1(l(w))
            forced = perm.index(trial[w])
            if nbr in trial:
                if trial[nbr] != forced:
                    return None
            else:
                trial[nbr] = forced
                frontier.append(nbr)
    return trial


def ulc_brute_opt(psi: UlcInstance) -> tuple[float, np.ndarray]:
    """Exact optimum with a witness labelling.

    Enumerates all L^V labellings in chunks; beyond the cap, falls back to
    breadth-first propagation, which certifies only perfectly satisfiable
    instances.
    """
    total = psi.L ** psi.num_vertices
    if total > BRUTE_FORCE_CAP:
        witness = has_perfect_labelling(psi)
        if witness is not None:
            return 1.0, witness
        raise ValueError("instance too large for brute force and not perfectly satisfiable")
    num_edges = len(psi.edges)
    perm_arrays = [np.asarray(p, dtype=np.int64) for p in psi.perms]
    best_count, best_index = -1, 0
    chunk = 1 << 20
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = np.empty((idx.size, psi.num_vertices), dtype=np.int64)
        rest = idx.copy()
        for w in range(psi.num_vertices):
            digits[:, w] = rest % psi.L
            rest //= psi.L
        sat = np.zeros(idx.size, dtype=np.int64)
        for (u, v), perm in zip(psi.edges, perm_arrays):
            sat += digits[:, u] == perm[digits[:, v]]
        arg = int(np.argmax(sat))
        if sat[arg] > best_count:
            best_count, best_index = int(sat[arg]), int(idx[arg])
    witness = np.empty(psi.num_vertices, dtype=np.int64)
    rest = best_index
    for w in range(psi.num_vertices):
        witness[w] = rest % psi.L
        rest //= psi.L
    return best_count / num_edges, witness


def planted_instance(
    num_vertices: int, degree: int, L: int, delta: float, seed: int
) -> tuple[UlcInstance, np.ndarray]:
    """Circulant instance with a hidden labelling.

    All but an exact floor(delta |E|) count of edges carry permutations
    consistent with the planted labelling, so its value is at least
    1 - delta by construction; the corrupted edges get uniform permutations.
    """
    if degree < 2 or degree % 2 != 0 or degree >= num_vertices:
        raise ValueError("circulant graphs need an even degree below the vertex count")
    if not 0.0 <= delta <= 1.0:
        raise ValueError("corruption fraction must lie in [0, 1]")
    rng = substream(seed, 0)
    labels = rng.integers(0, L, size=num_vertices)
    edges = []
    for offset in range(1, degree // 2 + 1):
        for u in range(num_vertices):
            edges.append((u, (u + offset) % num_vertices))
    corrupt_count = math.floor(delta * len(edges))
    corrupt = set(rng.choice(len(edges), size=corrupt_count, replace=False).tolist())
    perms = []
    for index, (u, v) in enumerate(edges):
        perm = rng.permutation(L)
        if index not in corrupt:
            # force perm(l(v)) = l(u)
            j = int(np.nonzero(perm == labels[u])[0][0])
            perm[j], perm[labels[v]] = perm[labels[v]], labels[u]
        perms.append(tuple(int(x) for x in perm))
    psi = UlcInstance(L, num_vertices, tuple(edges), tuple(perms))
    return psi, labels


# ---------------------------------------------------------------------------
# Long-code tables, composition, folding
# ---------------------------------------------------------------------------


def permutation_map(perm, L: int) -> np.ndarray:
    """Index map P with f_v[P[x]] = f_v(x o pi): bit j of P[x] is bit pi(j) of x."""
    xs = np.arange(1 << L, dtype=np.int64)
    bits = (xs[:, None] >> np.asarray(perm, dtype=np.int64)[None, :]) & 1
    return bits @ (np.int64(1) << np.arange(L, dtype=np.int64))


def fold_references(masks: np.ndarray, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Canonical (representative, sign) pairs: points with the top bit set
    are read through their complement with a -1 literal sign."""
    full = (1 << L) - 1
    top = masks >> (L - 1) & 1
    reps = np.where(top == 1, masks ^ full, masks)
    signs = np.where(top == 1, -1, 1)
    return reps, signs.astype(np.int8)


def fold_table(values: np.ndarray, L: int) -> np.ndarray:
    """The function the folded reads actually see: odd extension from the
    half-cube of representatives."""
    masks = np.arange(1 << L, dtype=np.int64)
    reps, signs = fold_references(masks, L)
    return signs * values[reps]


def composed_tables(psi: UlcInstance, assignment: Assignment, u: int, fold: bool) -> np.ndarray:
    """Stack of f_v(x o pi_{u,v}) rows over the neighbors v of u.

    Folding acts on the neighbor's variable space before composition: a
    folded read of the point y = x o pi is the literal sign(y) f_v(rep(y)).
    """
    rows = []
    for v, perm in psi.adjacency()[u]:
        vals = table_values(assignment[v])
        if fold:
            vals = fold_table(vals, psi.L)
        rows.append(vals[permutation_map(perm, psi.L)])
    return np.array(rows)


def neighborhood_average(psi: UlcInstance, assignment: Assignment, u: int, fold: bool = False) -> RealTable:
    """g_u = E_{v in N(u)}[f_v(x o pi_{u,v})], clamped to [-1, 1]."""
    mean = composed_tables(psi, assignment, u, fold).mean(axis=0)
    return RealTable(psi.L, np.clip(mean, -1.0, 1.0))


# ---------------------------------------------------------------------------
# Predicates and their bounded extensions
# ---------------------------------------------------------------------------

PREDICATE_ARITY = {"eq": 2, "nae": 3, "xor": 3}


def predicate_table(name: str) -> RealTable:
    """The 0/1 acceptance table of a named predicate on {-1,1}^k."""
    if name == "eq":
        vals = np.array([1.0, 0.0, 0.0, 1.0])  # equal signs at masks 00 and 11
        return RealTable(2, vals)
    if name == "nae":
        masks = np.arange(8)
        vals = np.where((masks == 0) | (masks == 7), 0.0, 1.0)
        return RealTable(3, vals)
    if name == "xor":
        masks = np.arange(8)
        parity = np.bitwise_count(masks.astype(np.uint32)) & 1
        return RealTable(3, np.where(parity == 0, 1.0, 0.0))
    raise ValueError(f"unknown predicate {name!r}")


def phi_star(phi: Table, y) -> float:
    """Multilinear extension of a 0/1 predicate to the solid cube.

    phi*(y) = sum_S phi^(S) prod_{i in S} y_i equals phi on the vertices
    and stays in [0, 1] inside.
    """
    if phi.n > 8:
        raise ValueError("predicate arity capped at 8")
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (phi.n,):
        raise ValueError(f"evaluation point must have {phi.n} coordinates")
    if np.any(np.abs(y) > 1.0 + 1e-12):
        raise ValueError("evaluation point must lie in [-1, 1]^k")
    coeffs = wht(phi).coeffs
    total = 0.0
    for mask, c in enumerate(coeffs):
        if c == 0.0:
            continue
        term = c
        m = mask
        while m:
            b = (m & -m).bit_length() - 1
            term *= y[b]
            m &= m - 1
        total += term
    return float(min(1.0, max(0.0, total)))


def _predicate_value(name: str, reads: np.ndarray) -> np.ndarray:
    """phi* on each row of reads, via the multilinear arithmetization."""
    if name == "eq":
        a, b = reads[:, 0], reads[:, 1]
        return 0.5 + 0.5 * a * b
    if name == "nae":
        a, b, c = reads[:, 0], reads[:, 1], reads[:, 2]
        return 0.75 - 0.25 * (a * b + b * c + a * c)
    if name == "xor":
        a, b, c = reads[:, 0], reads[:, 1], reads[:, 2]
        return 0.5 + 0.5 * a * b * c
    raise ValueError(f"unknown predicate {name!r}")


# ---------------------------------------------------------------------------
# Testers as query distributions and the reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LongCodeTester:
    name: str  # nae | kkmo | threexor | blr
    param: float | None = None

    @classmethod
    def parse(cls, text: str) -> "LongCodeTester":
        parts = text.split(":")
        name = parts[0]
        if name == "nae" or name == "blr":
            if len(parts) != 1:
                raise ValueError(f"tester {name} takes no parameter")
            return cls(name)
        if name in ("kkmo", "threexor"):
            if len(parts) != 2:
                raise ValueError(f"tester {name} needs one parameter")
            param = float(parts[1])
            if not 0.0 <= param <= 1.0:
                raise ValueError(f"tester parameter must lie in [0, 1]")
            return cls(name, param)
        raise ValueError(f"unknown tester {text!r}")

    @property
    def k(self) -> int:
        return 2 if self.name == "kkmo" else 3

    @property
    def predicate(self) -> str:
        return {"nae": "nae", "kkmo": "eq", "threexor": "xor", "blr": "xor"}[self.name]

    @property
    def dictator_acceptance(self) -> float:
        if self.name in ("nae", "blr"):
            return 1.0
        if self.name == "kkmo":
            return 0.5 + 0.5 * self.param
        return 1.0 - self.param / 2.0

    def sample_queries(self, rng: np.random.Generator, m: int, L: int) -> np.ndarray:
        """(m, k) query masks drawn from the tester's distribution."""
        if self.name == "kkmo":
            xs = uniform_masks(rng, m, L)
            ys = xs ^ bernoulli_masks(rng, m, L, (1.0 - self.param) / 2.0)
            return np.column_stack([xs, ys])
        if self.name == "nae":
            return np.column_stack(nae_query_masks(rng, m, L))
        xs = uniform_masks(rng, m, L)
        ys = uniform_masks(rng, m, L)
        zs = xs ^ ys
        if self.name == "threexor":
            xs = xs ^ bernoulli_masks(rng, m, L, self.param / 2.0)
        return np.column_stack([xs, ys, zs])


@dataclass(frozen=True, eq=False)
class CspInstance:
    """Sampled long-code CSP: M constraints on (vertex, point) variables."""

    L: int
    k: int
    predicate: str
    tester: str
    verts: np.ndarray  # (M, k) vertex per read
    masks: np.ndarray  # (M, k) table index per read
    signs: np.ndarray  # (M, k) folding literal signs
    seed: int
    folded: bool

    def __post_init__(self):
        for arr in (self.verts, self.masks, self.signs):
            if arr.shape != self.verts.shape:
                raise ValueError("constraint arrays must align")
            arr.setflags(write=False)
        if self.verts.shape[1] != self.k or self.k != PREDICATE_ARITY[self.predicate]:
            raise ValueError("constraint arity must match the predicate")

    @property
    def weight(self) -> float:
        """Uniform constraint weight; weights sum to one."""
        return 1.0 / self.verts.shape[0]

    def to_json(self) -> str:
        return json.dumps(
            {
                "L": self.L,
                "k": self.k,
                "predicate": self.predicate,
                "tester": self.tester,
                "seed": self.seed,
                "folded": self.folded,
                "constraints": [
                    {
                        "weight": self.weight,
                        "vars": [
                            [int(v), int(x), int(s)]
                            for v, x, s in zip(self.verts[i], self.masks[i], self.signs[i])
                        ],
                    }
                    for i in range(self.verts.shape[0])
                ],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "CspInstance":
        blob = json.loads(text)
        rows = blob["constraints"]
        verts = np.array([[v for v, _, _ in row["vars"]] for row in rows], dtype=np.int64)
        masks = np.array([[x for _, x, _ in row["vars"]] for row in rows], dtype=np.int64)
        signs = np.array([[s for _, _, s in row["vars"]] for row in rows], dtype=np.int8)
        return cls(
            blob["L"], blob["k"], blob["predicate"], blob["tester"],
            verts, masks, signs, blob["seed"], blob["folded"],
        )


def reduce_to_csp(
    psi: UlcInstance, tester: LongCodeTester | str, m: int, seed: int, fold: bool = True
) -> CspInstance:
    """Sample m long-code constraints: uniform vertex, k uniform neighbors,
    tester-distributed queries, references composed through the edge
    permutations (with folding literals unless disabled)."""
    if isinstance(tester, str):
        tester = LongCodeTester.parse(tester)
    if psi.L > MAX_REDUCE_LABELS:
        raise ValueError(f"long-code tables need L <= {MAX_REDUCE_LABELS}")
    if m < 1:
        raise ValueError("need at least one constraint")
    rng = substream(seed, 0)
    adj = psi.adjacency()
    deg = psi.degree
    nbr = np.array([[v for v, _ in adj[u]] for u in range(psi.num_vertices)], dtype=np.int64)
    perm_maps = np.array(
        [[permutation_map(perm, psi.L) for _, perm in adj[u]] for u in range(psi.num_vertices)],
        dtype=np.int64,
    )  # (V, deg, 2^L)
    k = tester.k
    us = rng.integers(0, psi.num_vertices, size=m)
    slots = rng.integers(0, deg, size=(m, k))
    queries = tester.sample_queries(rng, m, psi.L)
    verts = nbr[us[:, None], slots]
    composed = perm_maps[us[:, None], slots, queries]
    if fold:
        masks, signs = fold_references(composed, psi.L)
    else:
        masks, signs = composed, np.ones((m, k), dtype=np.int8)
    return CspInstance(
        psi.L, k, tester.predicate, _tester_label(tester), verts, masks, signs, seed, fold
    )


def _tester_label(tester: LongCodeTester) -> str:
    return tester.name if tester.param is None else f"{tester.name}:{tester.param!r}"


def _assignment_matrix(assignment: Assignment, L: int) -> np.ndarray:
    rows = []
    for table in assignment:
        if table.n != L:
            raise ValueError("assignment tables must live on L variables")
        rows.append(np.clip(table_values(table), -1.0, 1.0))
    return np.array(rows)


def csp_value(csp: CspInstance, assignment: Assignment) -> McReport:
    """Exact average of phi* over the sampled constraints.

    The stderr is the constraint-sampling error, for comparisons against
    values of the underlying distribution.
    """
    matrix = _assignment_matrix(assignment, csp.L)
    reads = csp.signs * matrix[csp.verts, csp.masks]
    return mc_report(_predicate_value(csp.predicate, reads), csp.seed)


def csp_value_stream(
    psi: UlcInstance, tester: LongCodeTester | str, assignment: Assignment,
    m: int, seed: int, fold: bool = True,
) -> McReport:
    """Monte-Carlo CSP value without materializing the constraints."""
    csp = reduce_to_csp(psi, tester, m, seed, fold)
    return csp_value(csp, assignment)


def csp_exact_kkmo_value(
    psi: UlcInstance, rho: float, assignment: Assignment, fold: bool = True
) -> float:
    """Exact expected value of the kkmo reduction: the full constraint
    distribution collapses to E_u[1/2 + 1/2 Stab_rho(g_u)] over folded
    neighborhood averages."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError("kkmo noise rate must lie in [0, 1]")
    total = 0.0
    for u in range(psi.num_vertices):
        g_u = neighborhood_average(psi, assignment, u, fold=fold)
        total += 0.5 + 0.5 * stability(g_u, rho)
    return total / psi.num_vertices


def dictator_assignment(psi: UlcInstance, labels: np.ndarray) -> Assignment:
    """f_u = DICT_{l(u)} as long-code tables."""
    labels = np.asarray(labels)
    if labels.shape != (psi.num_vertices,):
        raise ValueError("labelling must cover every vertex")
    masks = np.arange(1 << psi.L, dtype=np.int64)
    tables = []
    for u in range(psi.num_vertices):
        bit = (masks >> int(labels[u])) & 1
        tables.append(TruthTable.from_signs(psi.L, 1.0 - 2.0 * bit.astype(np.float64)))
    return tables


def influence_sets(
    psi: UlcInstance, assignment: Assignment, gamma: float
) -> list[tuple[list[int], list[int]]]:
    """Per vertex, the 0-indexed label sets (J_u, J_u').

    J_u collects labels with Inf^{(1-gamma)}(g_u) >= gamma, J_u' those with
    Inf^{(1-gamma)}(f_u) >= gamma/2.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    sets = []
    for u in range(psi.num_vertices):
        g_u = neighborhood_average(psi, assignment, u)
        g_prof = noisy_influence_profile(g_u, 1.0 - gamma)
        f_prof = noisy_influence_profile(assignment[u], 1.0 - gamma)
        j_u = [int(i) for i in np.nonzero(g_prof >= gamma)[0]]
        j_up = [int(i) for i in np.nonzero(f_prof >= gamma / 2.0)[0]]
        sets.append((j_u, j_up))
    return sets


def decode_labelling(
    psi: UlcInstance, assignment: Assignment, gamma: float, seed: int
) -> np.ndarray:
    """Influence decoding: a seeded uniform label from J_u union J_u' per
    vertex (label 0 where the union is empty)."""
    labels = np.zeros(psi.num_vertices, dtype=np.int64)
    for u, (j_u, j_up) in enumerate(influence_sets(psi, assignment, gamma)):
        union = sorted(set(j_u) | set(j_up))
        if union:
            rng = substream(seed, u)
            labels[u] = union[int(rng.integers(0, len(union)))]
    return labels
