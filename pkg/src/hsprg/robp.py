"""Read-once branching programs and the monotone sandwiching machinery.

An (S, D, T)-program reads T labels of D bits and walks a layered graph of
width at most 2^S.  A program is monotone when every layer's states are
totally ordered by inclusion of their accepting-suffix sets; the natural
program for a halfspace (states = partial sums) is monotone, and any
monotone program can be squeezed between two narrow monotone programs by
quantizing acceptance probabilities.  Monotone functions of monotone
programs are sandwiched componentwise with a union-bound gap.

Partial sums in halfspace compilation are exact rationals so that
boundary ties under the sgn(0)=1 convention are never decided by float
rounding.  Acceptance probabilities are exact rationals too (labels are
uniform over {0,1}^D).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .halfspace import is_monotone_table


class ResourceError(RuntimeError):
    """State growth beyond the configured cap."""


class NotMonotoneError(ValueError):
    pass


class ROBP:
    """Layered program: trans[i][v][label] is the successor in layer i+1."""

    def __init__(self, trans: Sequence[Sequence[Sequence[int]]],
                 accept: Sequence[int], D: int):
        self.trans = [[tuple(row) for row in layer] for layer in trans]
        self.accept = tuple(int(b) for b in accept)
        self.D = D
        self.T = len(self.trans)
        n_labels = 1 << D
        widths = [len(layer) for layer in self.trans] + [len(self.accept)]
        if widths[0] != 1:
            raise ValueError("layer 0 must contain exactly the start state")
        for i, layer in enumerate(self.trans):
            for row in layer:
                if len(row) != n_labels:
                    raise ValueError(f"layer {i}: transitions must be total on {n_labels} labels")
                if any(not 0 <= nxt < widths[i + 1] for nxt in row):
                    raise ValueError(f"layer {i}: successor out of range")
        self.widths = widths

    @property
    def width(self) -> int:
        return max(self.widths)

    @property
    def space(self) -> int:
        """Smallest S with width <= 2^S."""
        return max(1, (self.width - 1).bit_length())

    def eval(self, labels: Sequence[int]) -> int:
        if len(labels) != self.T:
            raise ValueError(f"expected {self.T} labels, got {len(labels)}")
        v = 0
        for i, z in enumerate(labels):
            if not 0 <= z < (1 << self.D):
                raise ValueError(f"label {z} does not fit in {self.D} bits")
            v = self.trans[i][v][z]
        return self.accept[v]

    def acceptance_probabilities(self) -> list[list[Fraction]]:
        """P(v) = Pr[accept from v] under uniform labels, exact, per layer."""
        probs = [[Fraction(int(b)) for b in self.accept]]
        n_labels = 1 << self.D
        for layer in reversed(self.trans):
            nxt = probs[0]
            probs.insert(0, [sum(nxt[row[z]] for z in range(n_labels)) / n_labels
                             for row in layer])
        return probs

    def accept_probability(self) -> Fraction:
        return self.acceptance_probabilities()[0][0]

    def to_json(self) -> dict:
        return {"D": self.D, "trans": [[list(r) for r in layer] for layer in self.trans],
                "accept": list(self.accept)}

    @classmethod
    def from_json(cls, data: dict) -> "ROBP":
        return cls(data["trans"], data["accept"], data["D"])

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path: str) -> "ROBP":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class MonotoneCertificate:
    """Per-layer state indices in nondecreasing Acc-set order."""

    orders: tuple[tuple[int, ...], ...]

    def rank_tables(self) -> list[dict[int, int]]:
        return [{v: r for r, v in enumerate(layer)} for layer in self.orders]


@dataclass(frozen=True)
class MonotoneCounterexample:
    layer: int
    v: int
    w: int
    suffix_v: tuple[int, ...]  # accepted from v, rejected from w
    suffix_w: tuple[int, ...]  # accepted from w, rejected from v


@dataclass(frozen=True)
class SandwichPair:
    down: ROBP
    up: ROBP
    eps: float

    def gap(self) -> Fraction:
        return self.up.accept_probability() - self.down.accept_probability()


def all_inputs(D: int, T: int):
    """Every label sequence, lexicographic; test-sized programs only."""
    import itertools
    return itertools.product(range(1 << D), repeat=T)


def halfspace_to_robp(w: Sequence, theta, alphabets: Sequence[Sequence],
                      strict: bool = False, max_states: int = 1 << 18
                      ) -> tuple[ROBP, MonotoneCertificate]:
    """Compile 1[sum w_i x_i >= theta] over per-step alphabets, exactly.

    Step i reads a D-bit label and takes the value alphabets[i][label mod
    size_i]; states are the reachable partial sums as exact rationals.
    Ordering states by partial sum certifies monotonicity.
    """
    n = len(w)
    if len(alphabets) != n:
        raise ValueError("need one alphabet per coordinate")
    sizes = [len(a) for a in alphabets]
    if any(s < 1 for s in sizes):
        raise ValueError("alphabets must be nonempty")
    D = max(1, max((s - 1).bit_length() for s in sizes))
    wq = [Fraction(x) for x in w]
    thetaq = Fraction(theta)
    alphq = [[Fraction(v) for v in a] for a in alphabets]

    layers_sums: list[list[Fraction]] = [[Fraction(0)]]
    trans: list[list[list[int]]] = []
    n_labels = 1 << D
    for i in range(n):
        cur = layers_sums[-1]
        nxt_index: dict[Fraction, int] = {}
        nxt_sums: list[Fraction] = []
        rows: list[list[int]] = []
        increments = [wq[i] * alphq[i][z % sizes[i]] for z in range(n_labels)]
        for s in cur:
            row = []
            for inc in increments:
                t = s + inc
                idx = nxt_index.get(t)
                if idx is None:
                    idx = len(nxt_sums)
                    nxt_index[t] = idx
                    nxt_sums.append(t)
                    if len(nxt_sums) > max_states:
                        raise ResourceError(
                            f"layer {i + 1} exceeds {max_states} states")
                row.append(idx)
            rows.append(row)
        # keep states sorted by partial sum so the certificate is the identity
        order = sorted(range(len(nxt_sums)), key=lambda j: nxt_sums[j])
        remap = {old: new for new, old in enumerate(order)}
        rows = [[remap[x] for x in row] for row in rows]
        nxt_sums = [nxt_sums[j] for j in order]
        trans.append(rows)
        layers_sums.append(nxt_sums)

    final = layers_sums[-1]
    accept = [int(s > thetaq if strict else s >= thetaq) for s in final]
    program = ROBP(trans, accept, D)
    cert = MonotoneCertificate(tuple(tuple(range(wd)) for wd in program.widths))
    return program, cert


def acc_bitsets(B: ROBP) -> list[list[int]]:
    """Accepting-suffix sets as bitsets; suffix index is label-lexicographic.

    Feasible for D*T up to ~20 bits of suffix space.
    """
    out = [[int(b) for b in B.accept]]
    n_labels = 1 << B.D
    for i in reversed(range(B.T)):
        block = 1 << (B.D * (B.T - i - 1))
        nxt = out[0]
        layer = []
        for row in B.trans[i]:
            acc = 0
            for z in range(n_labels):
                acc |= nxt[row[z]] << (z * block)
            layer.append(acc)
        out.insert(0, layer)
    return out


def _decode_suffix(index: int, D: int, steps: int) -> tuple[int, ...]:
    labels = []
    for i in range(steps):
        shift = D * (steps - 1 - i)
        labels.append((index >> shift) & ((1 << D) - 1))
    return tuple(labels)


def check_monotone(B: ROBP) -> MonotoneCertificate | MonotoneCounterexample:
    """Certificate of per-layer Acc-set total order, or an incomparable pair."""
    sets = acc_bitsets(B)
    orders = []
    for i, layer in enumerate(sets):
        idx = sorted(range(len(layer)), key=lambda v: (bin(layer[v]).count("1"), layer[v]))
        for a, b in zip(idx, idx[1:]):
            if layer[a] & ~layer[b]:
                only_a = layer[a] & ~layer[b]
                only_b = layer[b] & ~layer[a]
                steps = B.T - i
                return MonotoneCounterexample(
                    i, a, b,
                    _decode_suffix((only_a & -only_a).bit_length() - 1, B.D, steps),
                    _decode_suffix((only_b & -only_b).bit_length() - 1, B.D, steps))
        orders.append(tuple(idx))
    return MonotoneCertificate(tuple(orders))


def sandwich_monotone(B: ROBP, eps: float,
                      cert: MonotoneCertificate | None = None) -> SandwichPair:
    """Narrow monotone programs below and above B with acceptance gap <= eps.

    States of each layer are grouped by quantizing their exact acceptance
    probability into intervals of width eps/(2T); the down program routes
    every group to its minimal representative under the monotone order,
    the up program to its maximal.  Soundness (down <= B <= up pointwise,
    gap <= eps) is enumerated in the tests rather than assumed.
    """
    if cert is None:
        result = check_monotone(B)
        if isinstance(result, MonotoneCounterexample):
            raise NotMonotoneError(f"program is not monotone at layer {result.layer}")
        cert = result
    if not 0 < eps:
        raise ValueError("eps must be positive")
    probs = B.acceptance_probabilities()
    width = Fraction(eps) / (2 * B.T)
    ranks = cert.rank_tables()

    # group[i][v] -> (down representative, up representative)
    reps: list[dict[int, tuple[int, int]]] = []
    for i, layer_probs in enumerate(probs):
        order = cert.orders[i]
        groups: dict[int, list[int]] = {}
        for v in order:
            groups.setdefault(int(layer_probs[v] / width) if width else 0, []).append(v)
        table = {}
        for members in groups.values():
            lo = min(members, key=lambda v: ranks[i][v])
            hi = max(members, key=lambda v: ranks[i][v])
            for v in members:
                table[v] = (lo, hi)
        reps.append(table)

    def build(which: int) -> ROBP:
        n_labels = 1 << B.D
        state_map: dict[int, int] = {}
        cur = [reps[0][0][which]]
        state_map[cur[0]] = 0
        trans: list[list[list[int]]] = []
        for i in range(B.T):
            nxt_map: dict[int, int] = {}
            nxt_states: list[int] = []
            rows = []
            for v in cur:
                row = []
                for z in range(n_labels):
                    target = reps[i + 1][B.trans[i][v][z]][which]
                    idx = nxt_map.get(target)
                    if idx is None:
                        idx = len(nxt_states)
                        nxt_map[target] = idx
                        nxt_states.append(target)
                    row.append(idx)
                rows.append(row)
            trans.append(rows)
            cur = nxt_states
        accept = [B.accept[v] for v in cur]
        return ROBP(trans, accept, B.D)

    return SandwichPair(build(0), build(1), eps)


def product_robp(programs: Sequence[ROBP], accept_fn: Callable[[tuple[int, ...]], int],
                 max_states: int = 1 << 18) -> ROBP:
    """Synchronous product; accept bit computed from the component bits."""
    if not programs:
        raise ValueError("need at least one program")
    D, T = programs[0].D, programs[0].T
    if any(p.D != D or p.T != T for p in programs):
        raise ValueError("programs must share D and T")
    n_labels = 1 << D
    cur = [(0,) * len(programs)]
    index = {cur[0]: 0}
    trans = []
    for i in range(T):
        rows = []
        nxt_index: dict[tuple[int, ...], int] = {}
        nxt_states: list[tuple[int, ...]] = []
        for state in cur:
            row = []
            for z in range(n_labels):
                target = tuple(p.trans[i][v][z] for p, v in zip(programs, state))
                idx = nxt_index.get(target)
                if idx is None:
                    idx = len(nxt_states)
                    nxt_index[target] = idx
                    nxt_states.append(target)
                    if len(nxt_states) > max_states:
                        raise ResourceError(f"product exceeds {max_states} states")
                row.append(idx)
            rows.append(row)
        trans.append(rows)
        cur = nxt_states
    accept = [accept_fn(tuple(p.accept[v] for p, v in zip(programs, state)))
              for state in cur]
    return ROBP(trans, accept, D)


def compose_monotone_sandwich(g_table: Sequence[int], programs: Sequence[ROBP],
                              eps: float,
                              certs: Sequence[MonotoneCertificate] | None = None
                              ) -> SandwichPair:
    """Sandwich g(B_1, ..., B_d) for monotone g; gap budget d*eps.

    Components are sandwiched at eps each; the union bound over the d
    component gaps gives the composed budget.
    """
    d = len(programs)
    if not is_monotone_table(g_table, d):
        raise NotMonotoneError("g is not monotone")
    pairs = [sandwich_monotone(p, eps, None if certs is None else certs[i])
             for i, p in enumerate(programs)]

    def g(bits: tuple[int, ...]) -> int:
        idx = 0
        for i, b in enumerate(bits):
            idx |= b << i
        return g_table[idx]

    down = product_robp([p.down for p in pairs], g)
    up = product_robp([p.up for p in pairs], g)
    return SandwichPair(down, up, d * eps)


@dataclass(frozen=True)
class TreeErrorBound:
    """s*(eps+delta) aggregate for decision trees of sandwiched programs."""

    eps: float
    delta: float
    zero_leaves: int
    one_leaves: int

    @property
    def total_leaves(self) -> int:
        return self.zero_leaves + self.one_leaves

    @property
    def bound(self) -> float:
        return self.total_leaves * (self.eps + self.delta)

    @property
    def bound_min_leaves(self) -> float:
        """Tighter variant counting only the rarer leaf label."""
        return min(self.zero_leaves, self.one_leaves) * (self.eps + self.delta)


def decision_tree_error_bound(eps: float, delta: float,
                              zero_leaves: int, one_leaves: int) -> TreeErrorBound:
    return TreeErrorBound(eps, delta, zero_leaves, one_leaves)


# ---------------------------------------------------------------------------
# Small-width PRG (recursive doubling with affine hashing over GF(2^(S+D+2)))


def nisan_word_bits(S: int, D: int) -> int:
    return S + D + 2  # 2 slack bits, pinned


def nisan_levels(T: int) -> int:
    if T < 1:
        raise ValueError("T must be positive")
    return max(0, (T - 1).bit_length())


def nisan_seed_bits(S: int, D: int, T: int) -> int:
    """One w-bit word plus 2w bits per recursion level, w = S + D + 2."""
    w = nisan_word_bits(S, D)
    return w + 2 * w * nisan_levels(T)


def nisan_generate(S: int, D: int, T: int, seed: int) -> list[int]:
    """Expand the seed into T labels of D bits.

    Level r output is (G_{r-1}(x), G_{r-1}(h_r(x))) with h_r(x) = a_r*x + b_r
    over GF(2^w); a label is the low D bits of its word.  T is padded to the
    next power of 2 internally and the output truncated.
    """
    from .gf2 import field

    w = nisan_word_bits(S, D)
    r = nisan_levels(T)
    bits = nisan_seed_bits(S, D, T)
    if not 0 <= seed < (1 << bits):
        raise ValueError(f"seed needs exactly {bits} bits")
    mask = (1 << w) - 1
    x = seed & mask
    hashes = []
    for i in range(r):
        chunk = seed >> (w + 2 * w * i)
        hashes.append((chunk & mask, (chunk >> w) & mask))
    f = field(w)

    def expand(word: int, level: int) -> list[int]:
        if level == 0:
            return [word & ((1 << D) - 1)]
        a, b = hashes[level - 1]
        return expand(word, level - 1) + expand(f.mul(a, word) ^ b, level - 1)

    return expand(x, r)[:T]
