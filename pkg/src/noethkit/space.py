"""The space algebra: constructors, point terms, and embedding quasi-orders.

Spaces are finite quasi-orders, naturals, binary sums/products, finite
words, finite trees, and their ordinal-length variants.  Points carry the
canonical embedding order of their constructor: the given relation on a
finite base, <= on naturals, componentwise on products, same-injection on
sums, Higman's subsequence embedding on words, and the homeomorphic
(children-order-respecting) embedding on trees.

Ordinal-length words are represented in finitely presented form: a finite
list of (letter, ordinal count) runs with distinct adjacent letters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Tuple, Union

from .ordinal import (
    ONE,
    ZERO,
    Ordinal,
    add,
    cmp,
    cut_tails,
    left_subtract,
    minimal_left,
    right_parts,
)


class SpaceError(ValueError):
    pass


# -- spaces -------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteQO:
    """Finite quasi-order; leq holds the full (reflexive, transitive) relation."""

    elements: Tuple[str, ...]
    leq: frozenset  # of (str, str) pairs

    def __post_init__(self):
        elems = set(self.elements)
        if len(elems) != len(self.elements):
            raise SpaceError("duplicate elements")
        for x, y in self.leq:
            if x not in elems or y not in elems:
                raise SpaceError("relation mentions unknown element")
        for x in self.elements:
            if (x, x) not in self.leq:
                raise SpaceError("relation is not reflexive at %r" % x)
        for (x, y), (y2, z) in itertools.product(self.leq, repeat=2):
            if y == y2 and (x, z) not in self.leq:
                raise SpaceError("relation is not transitive: %r %r %r" % (x, y, z))

    def holds(self, x: str, y: str) -> bool:
        return (x, y) in self.leq

    def up_set(self, names: Iterable[str]) -> frozenset:
        return frozenset(y for y in self.elements
                         if any(self.holds(x, y) for x in names))

    def down_set(self, names: Iterable[str]) -> frozenset:
        return frozenset(y for y in self.elements
                         if any(self.holds(y, x) for x in names))


def discrete(*names: str) -> FiniteQO:
    return FiniteQO(tuple(names), frozenset((n, n) for n in names))


def finite_qo(names: Iterable[str], pairs: Iterable[Tuple[str, str]]) -> FiniteQO:
    """Build a FiniteQO from generating pairs (reflexive-transitive closure)."""
    names = tuple(names)
    rel = {(n, n) for n in names}
    rel.update(pairs)
    changed = True
    while changed:
        changed = False
        for (x, y), (y2, z) in itertools.product(tuple(rel), repeat=2):
            if y == y2 and (x, z) not in rel:
                rel.add((x, z))
                changed = True
    return FiniteQO(names, frozenset(rel))


def chain(*names: str) -> FiniteQO:
    return finite_qo(names, [(names[i], names[i + 1]) for i in range(len(names) - 1)])


@dataclass(frozen=True)
class Nat:
    pass


@dataclass(frozen=True)
class Sum:
    left: "SpaceExpr"
    right: "SpaceExpr"


@dataclass(frozen=True)
class Product:
    left: "SpaceExpr"
    right: "SpaceExpr"


@dataclass(frozen=True)
class Words:
    base: "SpaceExpr"


@dataclass(frozen=True)
class Trees:
    base: "SpaceExpr"


@dataclass(frozen=True)
class OrdWords:
    base: "SpaceExpr"
    alpha: Ordinal

    def __post_init__(self):
        if self.alpha.is_zero():
            raise SpaceError("OrdWords needs alpha > 0")


@dataclass(frozen=True)
class OrdTrees:
    base: "SpaceExpr"
    alpha: Ordinal

    def __post_init__(self):
        if self.alpha.is_zero():
            raise SpaceError("OrdTrees needs alpha > 0")


SpaceExpr = Union[FiniteQO, Nat, Sum, Product, Words, Trees, OrdWords, OrdTrees]


# -- points -------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class NatVal:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise SpaceError("naturals only")


@dataclass(frozen=True)
class Pair:
    left: "PointTerm"
    right: "PointTerm"


@dataclass(frozen=True)
class InL:
    value: "PointTerm"


@dataclass(frozen=True)
class InR:
    value: "PointTerm"


@dataclass(frozen=True)
class Word:
    letters: Tuple["PointTerm", ...]


@dataclass(frozen=True)
class TreeNode:
    label: "PointTerm"
    children: Tuple["PointTerm", ...]


@dataclass(frozen=True)
class OrdWord:
    """Finitely presented ordinal word: runs of (letter, count), count >= 1,
    adjacent letters distinct.  Use ord_word() to get the canonical form."""

    segments: Tuple[Tuple["PointTerm", Ordinal], ...]

    def __post_init__(self):
        prev = None
        for letter, count in self.segments:
            if count.is_zero():
                raise SpaceError("zero-length run")
            if prev is not None and prev == letter:
                raise SpaceError("adjacent runs must have distinct letters")
            prev = letter


@dataclass(frozen=True)
class OrdTreeNode:
    label: "PointTerm"
    children: OrdWord  # letters are OrdTreeNode subtrees


PointTerm = Union[Atom, NatVal, Pair, InL, InR, Word, TreeNode, OrdWord, OrdTreeNode]


def ord_word(segments: Iterable[Tuple[PointTerm, Ordinal]]) -> OrdWord:
    """Canonicalize: drop empty runs, merge adjacent runs of equal letters."""
    merged: list = []
    for letter, count in segments:
        if count.is_zero():
            continue
        if merged and merged[-1][0] == letter:
            merged[-1] = (letter, add(merged[-1][1], count))
        else:
            merged.append((letter, count))
    return OrdWord(tuple(merged))


def word_to_ord(w: Word) -> OrdWord:
    return ord_word((letter, ONE) for letter in w.letters)


def ord_to_word(w: OrdWord) -> Word:
    """Expand a finitely-counted ordinal word into a plain word."""
    letters = []
    for letter, count in w.segments:
        if not count.is_finite():
            raise SpaceError("cannot expand an infinite run")
        letters.extend([letter] * count.to_int())
    return Word(tuple(letters))


def ow_length(w: OrdWord) -> Ordinal:
    total = ZERO
    for _, count in w.segments:
        total = add(total, count)
    return total


def ow_suffix_from(w: OrdWord, i: int) -> OrdWord:
    return OrdWord(w.segments[i:])


def ow_suffixes_strictly_after(w: OrdWord, below: Ordinal) -> Tuple[OrdWord, ...]:
    """The distinct suffixes w_{>g} for positions g < below (a finite set)."""
    out = []
    seen = set()
    start = ZERO
    for i, (letter, count) in enumerate(w.segments):
        if cmp(start, below) >= 0:
            break
        room = left_subtract(start, below)
        max_cut = room if cmp(room, count) < 0 else None
        for rem in cut_tails(count, max_cut):
            if rem.is_zero():
                suffix = OrdWord(w.segments[i + 1:])
            else:
                suffix = OrdWord(((letter, rem),) + w.segments[i + 1:])
            if suffix not in seen:
                seen.add(suffix)
                out.append(suffix)
        start = add(start, count)
    if cmp(ow_length(w), below) < 0:
        empty = OrdWord(())
        if empty not in seen:
            out.append(empty)
    return tuple(out)


def ow_cut_pairs(w: OrdWord, slack: int = 4) -> Tuple[Tuple[OrdWord, OrdWord], ...]:
    """Candidate splits w = uv.  Exact for finite words; for infinite runs the
    prefix length within a run is sampled at its minimum plus `slack` bumps
    (sound, and complete for the upward-closed opens tested against them)."""
    pairs = []
    seen = set()

    def emit(prefix_segments, suffix_segments):
        key = (tuple(prefix_segments), tuple(suffix_segments))
        if key not in seen:
            seen.add(key)
            pairs.append((ord_word(prefix_segments), OrdWord(tuple(suffix_segments))))

    for i in range(len(w.segments) + 1):
        emit(w.segments[:i], w.segments[i:])
    for i, (letter, count) in enumerate(w.segments):
        for rem in right_parts(count):
            if rem.is_zero() or rem == count:
                continue  # covered by the boundary cuts
            low = minimal_left(rem, count)
            cuts = [low]
            if rem.terms and not rem.terms[0][0].is_zero():
                cuts.extend(add(low, Ordinal.from_int(j)) for j in range(1, slack + 1))
            for cut in cuts:
                emit(list(w.segments[:i]) + [(letter, cut)],
                     [(letter, rem)] + list(w.segments[i + 1:]))
    return tuple(pairs)


# -- structural size and typechecking ----------------------------------------


def point_size(p: PointTerm) -> int:
    """Structural size used by the enumeration bound: atoms weigh 1, naturals
    weigh their value, pairs take the max of their sides, sequences add up
    (each letter weighing at least 1), tree nodes add label and children."""
    if isinstance(p, Atom):
        return 1
    if isinstance(p, NatVal):
        return p.n
    if isinstance(p, Pair):
        return max(point_size(p.left), point_size(p.right))
    if isinstance(p, (InL, InR)):
        return point_size(p.value)
    if isinstance(p, Word):
        return sum(max(point_size(x), 1) for x in p.letters)
    if isinstance(p, TreeNode):
        return max(point_size(p.label), 1) + sum(point_size(c) for c in p.children)
    if isinstance(p, OrdWord):
        total = 0
        for letter, count in p.segments:
            if not count.is_finite():
                raise SpaceError("infinite runs have no finite size")
            total += count.to_int() * max(point_size(letter), 1)
        return total
    if isinstance(p, OrdTreeNode):
        return max(point_size(p.label), 1) + point_size(p.children)
    raise SpaceError("not a point: %r" % (p,))


def typecheck(space: SpaceExpr, p: PointTerm) -> bool:
    """Whether p is a well-formed element of space."""
    if isinstance(space, FiniteQO):
        return isinstance(p, Atom) and p.name in space.elements
    if isinstance(space, Nat):
        return isinstance(p, NatVal)
    if isinstance(space, Sum):
        if isinstance(p, InL):
            return typecheck(space.left, p.value)
        if isinstance(p, InR):
            return typecheck(space.right, p.value)
        return False
    if isinstance(space, Product):
        return (isinstance(p, Pair) and typecheck(space.left, p.left)
                and typecheck(space.right, p.right))
    if isinstance(space, Words):
        return (isinstance(p, Word)
                and all(typecheck(space.base, x) for x in p.letters))
    if isinstance(space, Trees):
        return (isinstance(p, TreeNode) and typecheck(space.base, p.label)
                and all(typecheck(space, c) for c in p.children))
    if isinstance(space, OrdWords):
        if not isinstance(p, OrdWord):
            return False
        if not all(typecheck(space.base, x) for x, _ in p.segments):
            return False
        return cmp(ow_length(p), space.alpha) < 0
    if isinstance(space, OrdTrees):
        if not isinstance(p, OrdTreeNode):
            return False
        if not typecheck(space.base, p.label):
            return False
        if cmp(ow_length(p.children), space.alpha) >= 0:
            return False
        return all(typecheck(space, t) for t, _ in p.children.segments)
    raise SpaceError("not a space: %r" % (space,))


# -- embedding quasi-orders ---------------------------------------------------


def higman_leq(u: Tuple, v: Tuple, letter_leq: Callable) -> bool:
    """Subsequence embedding: a strictly increasing position map with
    letterwise domination.  Greedy leftmost matching."""
    j = 0
    for x in u:
        while j < len(v) and not letter_leq(x, v[j]):
            j += 1
        if j == len(v):
            return False
        j += 1
    return True


def ow_higman_leq(u: OrdWord, v: OrdWord, letter_leq: Callable) -> bool:
    """Higman embedding on finitely presented ordinal words: greedy run
    matching, consuming counts ordinal-wise."""
    i = 0
    need = u.segments[0][1] if u.segments else ZERO
    j = 0
    avail = v.segments[0][1] if v.segments else ZERO
    while i < len(u.segments):
        if j >= len(v.segments):
            return False
        x = u.segments[i][0]
        y = v.segments[j][0]
        if letter_leq(x, y):
            if cmp(need, avail) <= 0:
                avail = left_subtract(need, avail)
                i += 1
                need = u.segments[i][1] if i < len(u.segments) else ZERO
                if avail.is_zero():
                    j += 1
                    avail = v.segments[j][1] if j < len(v.segments) else ZERO
            else:
                need = left_subtract(avail, need)
                j += 1
                avail = v.segments[j][1] if j < len(v.segments) else ZERO
        else:
            j += 1
            avail = v.segments[j][1] if j < len(v.segments) else ZERO
    return True


def point_leq(space: SpaceExpr, x: PointTerm, y: PointTerm) -> bool:
    """The canonical embedding quasi-order of the space constructor."""
    if not (typecheck(space, x) and typecheck(space, y)):
        raise SpaceError("points do not typecheck in %r" % (space,))
    return _leq(space, x, y)


@lru_cache(maxsize=None)
def _leq(space: SpaceExpr, x: PointTerm, y: PointTerm) -> bool:
    if isinstance(space, FiniteQO):
        return space.holds(x.name, y.name)
    if isinstance(space, Nat):
        return x.n <= y.n
    if isinstance(space, Sum):
        if isinstance(x, InL) and isinstance(y, InL):
            return _leq(space.left, x.value, y.value)
        if isinstance(x, InR) and isinstance(y, InR):
            return _leq(space.right, x.value, y.value)
        return False
    if isinstance(space, Product):
        return (_leq(space.left, x.left, y.left)
                and _leq(space.right, x.right, y.right))
    if isinstance(space, Words):
        return higman_leq(x.letters, y.letters,
                          lambda a, b: _leq(space.base, a, b))
    if isinstance(space, Trees):
        return _tree_leq(space, x, y)
    if isinstance(space, OrdWords):
        return ow_higman_leq(x, y, lambda a, b: _leq(space.base, a, b))
    if isinstance(space, OrdTrees):
        return _ord_tree_leq(space, x, y)
    raise SpaceError("not a space: %r" % (space,))


def _tree_leq(space: Trees, s: TreeNode, t: TreeNode) -> bool:
    # Homeomorphic embedding: sink into a child, or match the root and embed
    # the children sequence Higman-wise.  This is the specialisation order of
    # the tree topology (and the divisibility order of the tree unfolding).
    if any(_tree_leq(space, s, c) for c in t.children):
        return True
    return (_leq(space.base, s.label, t.label)
            and higman_leq(s.children, t.children,
                           lambda a, b: _tree_leq(space, a, b)))


def _ord_tree_leq(space: OrdTrees, s: OrdTreeNode, t: OrdTreeNode) -> bool:
    if any(_ord_tree_leq(space, s, c) for c, _ in t.children.segments):
        return True
    return (_leq(space.base, s.label, t.label)
            and ow_higman_leq(s.children, t.children,
                              lambda a, b: _ord_tree_leq(space, a, b)))


# -- enumeration --------------------------------------------------------------


def canonical_key(p: PointTerm):
    """Deterministic total order on points (used for stable output)."""
    if isinstance(p, Atom):
        return (0, p.name)
    if isinstance(p, NatVal):
        return (1, p.n)
    if isinstance(p, Pair):
        return (2, canonical_key(p.left), canonical_key(p.right))
    if isinstance(p, InL):
        return (3, canonical_key(p.value))
    if isinstance(p, InR):
        return (4, canonical_key(p.value))
    if isinstance(p, Word):
        return (5, tuple(canonical_key(x) for x in p.letters))
    if isinstance(p, TreeNode):
        return (6, canonical_key(p.label),
                tuple(canonical_key(c) for c in p.children))
    if isinstance(p, OrdWord):
        from .ordinal import _sort_key
        return (7, tuple((canonical_key(x), _sort_key(c)) for x, c in p.segments))
    if isinstance(p, OrdTreeNode):
        return (8, canonical_key(p.label), canonical_key(p.children))
    raise SpaceError("not a point: %r" % (p,))


def enumerate_points(space: SpaceExpr, size_bound: int) -> Tuple[PointTerm, ...]:
    """All points of structural size <= size_bound, duplicate-free, sorted by
    (size, canonical key).  Ordinal words are enumerated with finite runs."""
    points = sorted(set(_enumerate(space, size_bound)),
                    key=lambda p: (point_size(p), canonical_key(p)))
    return tuple(points)


@lru_cache(maxsize=None)
def _enumerate(space: SpaceExpr, bound: int) -> Tuple[PointTerm, ...]:
    if bound < 0:
        return ()
    if isinstance(space, FiniteQO):
        if bound < 1:
            return ()
        return tuple(Atom(n) for n in space.elements)
    if isinstance(space, Nat):
        return tuple(NatVal(n) for n in range(bound + 1))
    if isinstance(space, Sum):
        return (tuple(InL(p) for p in _enumerate(space.left, bound))
                + tuple(InR(p) for p in _enumerate(space.right, bound)))
    if isinstance(space, Product):
        return tuple(Pair(l, r)
                     for l in _enumerate(space.left, bound)
                     for r in _enumerate(space.right, bound))
    if isinstance(space, Words):
        letters = _enumerate(space.base, bound)
        out = []
        def extend(prefix, remaining):
            out.append(Word(tuple(prefix)))
            for letter in letters:
                weight = max(point_size(letter), 1)
                if weight <= remaining:
                    prefix.append(letter)
                    extend(prefix, remaining - weight)
                    prefix.pop()
        extend([], bound)
        return tuple(out)
    if isinstance(space, Trees):
        return _enumerate_trees(space, bound)
    if isinstance(space, OrdWords):
        letters = _enumerate(space.base, bound)
        out = []
        def extend(prefix, remaining, last):
            out.append(OrdWord(tuple(prefix)))
            for letter in letters:
                if letter == last:
                    continue
                weight = max(point_size(letter), 1)
                for count in range(1, remaining // weight + 1):
                    prefix.append((letter, Ordinal.from_int(count)))
                    extend(prefix, remaining - weight * count, letter)
                    prefix.pop()
        extend([], bound, None)
        return tuple(p for p in out if typecheck(space, p))
    if isinstance(space, OrdTrees):
        return _enumerate_ord_trees(space, bound)
    raise SpaceError("cannot enumerate %r" % (space,))


def _enumerate_trees(space: Trees, bound: int) -> Tuple[TreeNode, ...]:
    labels = _enumerate(space.base, bound)
    by_size: dict = {}

    def trees_of_size(n: int) -> Tuple[TreeNode, ...]:
        if n in by_size:
            return by_size[n]
        out = []
        for label in labels:
            lw = max(point_size(label), 1)
            if lw > n:
                continue
            for kids in _forests(n - lw, n - lw, trees_of_size):
                out.append(TreeNode(label, kids))
        by_size[n] = tuple(out)
        return by_size[n]

    result = []
    for n in range(1, bound + 1):
        result.extend(trees_of_size(n))
    return tuple(result)


def _forests(total: int, limit: int, trees_of_size) -> Iterable[Tuple]:
    """All child tuples with sizes summing to exactly `total`."""
    if total == 0:
        yield ()
        return
    for first_size in range(1, total + 1):
        for first in trees_of_size(first_size):
            for rest in _forests(total - first_size, limit, trees_of_size):
                yield (first,) + rest


def _enumerate_ord_trees(space: OrdTrees, bound: int) -> Tuple[OrdTreeNode, ...]:
    labels = _enumerate(space.base, bound)
    by_size: dict = {}

    def trees_of_size(n: int) -> Tuple[OrdTreeNode, ...]:
        if n in by_size:
            return by_size[n]
        out = []
        for label in labels:
            lw = max(point_size(label), 1)
            if lw > n:
                continue
            for kids in _ord_forests(n - lw, trees_of_size, None):
                tree = OrdTreeNode(label, OrdWord(kids))
                if typecheck(space, tree):
                    out.append(tree)
        by_size[n] = tuple(out)
        return by_size[n]

    result = []
    for n in range(1, bound + 1):
        result.extend(trees_of_size(n))
    return tuple(result)


def _ord_forests(total: int, trees_of_size, last) -> Iterable[Tuple]:
    if total == 0:
        yield ()
        return
    for first_size in range(1, total + 1):
        for first in trees_of_size(first_size):
            if first == last:
                continue
            for count in range(1, total // first_size + 1):
                for rest in _ord_forests(total - first_size * count,
                                         trees_of_size, first):
                    yield ((first, Ordinal.from_int(count)),) + rest
