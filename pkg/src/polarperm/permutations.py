"""Factor-graph layer permutations realized as bit-index permutations.

A layer permutation reorders the n processing-element layers of the polar
factor graph. Every such reordering is equivalent to decoding the original
graph with codeword positions relabeled by the induced index map: bit t of
the new index is bit slots[t] of the old one. Decoding then permutes the
channel LLRs *and* the frozen set forward, and maps hard decisions back.
"""

import math
from dataclasses import dataclass

import numpy as np

from .polar_code import PolarCode


@dataclass(frozen=True)
class LayerPermutation:
    """slots[t] = original layer occupying slot t (slot 0 = 2^0-stride side)."""

    slots: tuple

    def __post_init__(self):
        if sorted(self.slots) != list(range(len(self.slots))):
            raise ValueError(f"not a permutation of 0..{len(self.slots) - 1}: {self.slots}")
        object.__setattr__(self, "slots", tuple(int(s) for s in self.slots))

    @property
    def n(self) -> int:
        return len(self.slots)

    @classmethod
    def identity(cls, n: int) -> "LayerPermutation":
        return cls(tuple(range(n)))

    def is_identity(self) -> bool:
        return self.slots == tuple(range(self.n))


def compose(first: LayerPermutation, second: LayerPermutation) -> LayerPermutation:
    """Layer permutation whose index map is index_map(first) o index_map(second)."""
    if first.n != second.n:
        raise ValueError("cannot compose permutations of different sizes")
    return LayerPermutation(tuple(second.slots[s] for s in first.slots))


@dataclass(frozen=True)
class IndexMap:
    """Bijection on {0..N-1} induced by a layer permutation, with inverse."""

    forward: np.ndarray
    inverse: np.ndarray

    def __post_init__(self):
        fwd = np.asarray(self.forward, dtype=np.int64)
        inv = np.asarray(self.inverse, dtype=np.int64)
        if not np.array_equal(np.sort(fwd), np.arange(fwd.size)):
            raise ValueError("forward is not a bijection")
        if not np.array_equal(fwd[inv], np.arange(fwd.size)):
            raise ValueError("inverse does not invert forward")
        fwd.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "forward", fwd)
        object.__setattr__(self, "inverse", inv)

    @property
    def N(self) -> int:
        return self.forward.size


def index_map(pi: LayerPermutation) -> IndexMap:
    """Index bijection of pi: bit t of forward[i] equals bit slots[t] of i."""
    n = pi.n
    i = np.arange(1 << n)
    forward = np.zeros_like(i)
    for t, layer in enumerate(pi.slots):
        forward |= ((i >> layer) & 1) << t
    inverse = np.empty_like(forward)
    inverse[forward] = i
    return IndexMap(forward=forward, inverse=inverse)


def permute_llrs(y, mapping: IndexMap) -> np.ndarray:
    """Relabel a channel frame: out[forward[i]] = y[i] (batched over rows)."""
    y = np.asarray(y)
    if y.shape[-1] != mapping.N:
        raise ValueError(f"expected length {mapping.N}, got {y.shape[-1]}")
    return y[..., mapping.inverse]


def unpermute_bits(u_pi, mapping: IndexMap) -> np.ndarray:
    """Map decisions taken on relabeled indices back: out[i] = u_pi[forward[i]]."""
    u_pi = np.asarray(u_pi)
    if u_pi.shape[-1] != mapping.N:
        raise ValueError(f"expected length {mapping.N}, got {u_pi.shape[-1]}")
    return u_pi[..., mapping.forward]


def permute_code(code: PolarCode, mapping: IndexMap) -> PolarCode:
    """Relabel the frozen set alongside the channel: same code, new indices."""
    if mapping.N != code.N:
        raise ValueError(f"index map size {mapping.N} != code length {code.N}")
    return PolarCode(
        n=code.n, N=code.N, K=code.K,
        frozen_mask=np.asarray(code.frozen_mask)[mapping.inverse],
    )


def _orderings(layers):
    """All orderings of `layers`, first element chosen in ascending position."""
    if len(layers) == 2:
        return [[layers[0], layers[1]], [layers[1], layers[0]]]
    out = []
    for i in range(len(layers)):
        head = layers[i]
        rest = layers[:i] + layers[i + 1 :]
        out.extend([head] + tail for tail in _orderings(rest))
    return out


def form_permutation_set(n: int, k: int) -> list:
    """The k!-sized search space: slots 0..n-k-1 fixed, top k layers permuted.

    Enumeration follows the recursive ordering (ascending first-element
    choice), so the identity permutation comes first.
    """
    if not 2 <= k <= n:
        raise ValueError(f"k must be in [2, n={n}], got {k}")
    fixed = list(range(n - k))
    return [
        LayerPermutation(tuple(fixed + tail))
        for tail in _orderings(list(range(n - k, n)))
    ]


def cyclic_shift_set(n: int) -> list:
    """The n cyclic rotations of the layer sequence, identity first."""
    return [
        LayerPermutation(tuple((t + r) % n for t in range(n)))
        for r in range(n)
    ]


def random_perm_set(n: int, M: int, rng: np.random.Generator) -> list:
    """Identity followed by M-1 distinct uniform random layer permutations."""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if M > math.factorial(n):
        raise ValueError(f"cannot draw {M} distinct permutations of {n} layers")
    perms = [LayerPermutation.identity(n)]
    seen = {perms[0].slots}
    while len(perms) < M:
        cand = tuple(int(v) for v in rng.permutation(n))
        if cand not in seen:
            seen.add(cand)
            perms.append(LayerPermutation(cand))
    return perms


def write_perm_file(path, perms, k: int, scores=None) -> None:
    """Write permutations (priority order) in the text exchange format."""
    if not perms:
        raise ValueError("cannot write an empty permutation set")
    n = perms[0].n
    if scores is not None and len(scores) != len(perms):
        raise ValueError("scores length must match perms length")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n={n} k={k}\n")
        for j, perm in enumerate(perms):
            line = " ".join(str(s) for s in perm.slots)
            if scores is not None:
                line += f" score={float(scores[j])!r}"
            fh.write(line + "\n")


def read_perm_file(path):
    """Read a permutation file; returns (perms, scores-or-None, n, k)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty permutation file")
    header = dict(token.split("=", 1) for token in lines[0].split())
    try:
        n, k = int(header["n"]), int(header["k"])
    except (KeyError, ValueError):
        raise ValueError(f"{path}: malformed header {lines[0]!r}") from None
    perms, scores = [], []
    for line in lines[1:]:
        tokens = line.split()
        score = None
        if tokens and tokens[-1].startswith("score="):
            score = float(tokens.pop()[len("score="):])
        if len(tokens) != n:
            raise ValueError(f"{path}: expected {n} slot values, got {line!r}")
        perms.append(LayerPermutation(tuple(int(t) for t in tokens)))
        scores.append(score)
    have_scores = [s for s in scores if s is not None]
    if have_scores and len(have_scores) != len(scores):
        raise ValueError(f"{path}: scores present on some lines but not all")
    return perms, (scores if have_scores else None), n, k
