"""Symbolic open and closed subsets over the space algebra.

Open expressions cover upward closures, letter-pattern word opens
<U1,...,Un>, up-closed concatenations, subtree opens, suffix triangles
b |> U over ordinal words, the F |x U prefix-guard sets, and raw one-letter
prefix cylinders (the non-up-closed opens of the prefix topology).  Closed
expressions cover downward closures, complements, and ordinal products of
F^{<b} / F^{<=1} atoms.

Membership is exact structural recursion.  The universal fallback oracle is
`extent`: filter an enumerated finite universe by membership.  `includes`
is three-valued, with two exact fragments (unions of upward closures, and
the letter-pattern inclusion rule) and an extent fallback that records its
bound.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, Optional, Tuple, Union as TUnion

from .ordinal import (ONE, ZERO, Ordinal, add, classify, cmp, left_subtract,
                      limit_finite_split, right_parts)
from .space import (
    Atom,
    FiniteQO,
    InL,
    OrdTreeNode,
    OrdTrees,
    OrdWord,
    OrdWords,
    PointTerm,
    Product,
    SpaceExpr,
    Sum,
    TreeNode,
    Trees,
    Word,
    Words,
    canonical_key,
    enumerate_points,
    ord_to_word,
    ow_cut_pairs,
    ow_suffix_from,
    ow_suffixes_strictly_after,
    point_leq,
    typecheck,
    word_to_ord,
)


class SetError(ValueError):
    pass


class RewriteShapeError(SetError):
    """Raised when a rewrite identity does not apply to the given shape."""


def default_bound() -> int:
    return int(os.environ.get("NOETHKIT_ORACLE_BOUND", "4"))


# -- open expressions ---------------------------------------------------------


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Whole:
    pass


@dataclass(frozen=True)
class Union:
    parts: Tuple["OpenExpr", ...]


@dataclass(frozen=True)
class Intersect:
    parts: Tuple["OpenExpr", ...]


@dataclass(frozen=True)
class UpClosure:
    """Upward closure of finitely many points in the point embedding order."""

    points: Tuple[PointTerm, ...]


@dataclass(frozen=True)
class BaseOpen:
    """A subset of a finite base, by element names (must be up-closed to be
    a legitimate open of the base quasi-order)."""

    names: frozenset


@dataclass(frozen=True)
class Rect:
    left: "OpenExpr"
    right: "OpenExpr"


@dataclass(frozen=True)
class SumOpen:
    left: "OpenExpr"
    right: "OpenExpr"


@dataclass(frozen=True)
class WordOpen:
    """<U1,...,Un>: words with letters in U1..Un in order, anything between.
    Parts are opens of the base space."""

    parts: Tuple["OpenExpr", ...]


@dataclass(frozen=True)
class ConcatUp:
    """Upward closure of the concatenation UV of two word-space opens."""

    left: "OpenExpr"
    right: "OpenExpr"


@dataclass(frozen=True)
class TreeOpen:
    """Trees with a subtree whose root lies in root_open and whose children
    word lies in children_open (an open of words over the tree space)."""

    root_open: "OpenExpr"
    children_open: "OpenExpr"


@dataclass(frozen=True)
class Triangle:
    """b |> U: ordinal words whose suffixes past every position < b lie in U
    (upward closed whenever U is)."""

    beta: Ordinal
    inner: "OpenExpr"


@dataclass(frozen=True)
class RTimes:
    """F |x U: upward closure of the words a.v with a outside the closed F
    and a.v in U."""

    closed: "ClosedExpr"
    inner: "OpenExpr"


@dataclass(frozen=True)
class PrefixConcat:
    """Letters(W).V: words starting with a letter in the base open W whose
    tail lies in V.  Not upward closed; the prefix-topology generator."""

    letters: "OpenExpr"
    rest: "OpenExpr"


@dataclass(frozen=True)
class UpSubstructure:
    """Points with a substructure (a suffix for words, a subtree for trees,
    the point itself included) in the inner set."""

    inner: "OpenExpr"


@dataclass(frozen=True)
class CarrierOpen:
    """A closed carrier used as a relative open inside a restricted topology."""

    closed: "ClosedExpr"


OpenExpr = TUnion[Empty, Whole, Union, Intersect, UpClosure, BaseOpen, Rect,
                  SumOpen, WordOpen, ConcatUp, TreeOpen, Triangle, RTimes,
                  PrefixConcat, UpSubstructure, CarrierOpen]


# -- closed expressions -------------------------------------------------------


@dataclass(frozen=True)
class EmptyC:
    pass


@dataclass(frozen=True)
class WholeC:
    pass


@dataclass(frozen=True)
class UnionC:
    parts: Tuple["ClosedExpr", ...]


@dataclass(frozen=True)
class IntersectC:
    parts: Tuple["ClosedExpr", ...]


@dataclass(frozen=True)
class DownClosure:
    points: Tuple[PointTerm, ...]


@dataclass(frozen=True)
class ComplementOf:
    open: "OpenExpr"


@dataclass(frozen=True)
class AtMostOne:
    """F^{<=1}: words of at most one letter, the letter drawn from F."""

    closed: "ClosedExpr"


@dataclass(frozen=True)
class Power:
    """F^{<b}: words of length < b with all letters in F."""

    closed: "ClosedExpr"
    beta: Ordinal

    def __post_init__(self):
        if self.beta.is_zero():
            raise SetError("Power needs a positive exponent")


ProductAtom = TUnion[AtMostOne, Power]


@dataclass(frozen=True)
class OrdProduct:
    """Concatenation product of AtMostOne / Power atoms (downward closed)."""

    atoms: Tuple[ProductAtom, ...]


ClosedExpr = TUnion[EmptyC, WholeC, UnionC, IntersectC, DownClosure,
                    ComplementOf, OrdProduct]


# -- membership ---------------------------------------------------------------


def member_open(space: SpaceExpr, p: PointTerm, u: OpenExpr) -> bool:
    if not typecheck(space, p):
        raise SetError("point %r does not typecheck in %r" % (p, space))
    return _member(space, p, u)


def _member(space, p, u) -> bool:
    if isinstance(u, Empty):
        return False
    if isinstance(u, Whole):
        return True
    if isinstance(u, Union):
        return any(_member(space, p, part) for part in u.parts)
    if isinstance(u, Intersect):
        return all(_member(space, p, part) for part in u.parts)
    if isinstance(u, UpClosure):
        return any(point_leq(space, e, p) for e in u.points)
    if isinstance(u, BaseOpen):
        return isinstance(p, Atom) and p.name in u.names
    if isinstance(u, Rect):
        if not isinstance(space, Product):
            raise SetError("Rect needs a product space")
        return (_member(space.left, p.left, u.left)
                and _member(space.right, p.right, u.right))
    if isinstance(u, SumOpen):
        if not isinstance(space, Sum):
            raise SetError("SumOpen needs a sum space")
        if isinstance(p, InL):
            return _member(space.left, p.value, u.left)
        return _member(space.right, p.value, u.right)
    if isinstance(u, WordOpen):
        return _member_word_open(space, p, u)
    if isinstance(u, ConcatUp):
        return _member_concat_up(space, p, u)
    if isinstance(u, TreeOpen):
        return _member_tree_open(space, p, u)
    if isinstance(u, Triangle):
        base, word = _as_ord_word(space, p)
        return all(_member(space, s, u.inner)
                   for s in ow_suffixes_strictly_after(word, u.beta))
    if isinstance(u, RTimes):
        return _member_rtimes(space, p, u)
    if isinstance(u, PrefixConcat):
        return _member_prefix_concat(space, p, u)
    if isinstance(u, UpSubstructure):
        return any(_member(space, s, u.inner) for s in _substructures(space, p))
    if isinstance(u, CarrierOpen):
        return _member_closed(space, p, u.closed)
    raise SetError("not an open expression: %r" % (u,))


def _word_space_base(space):
    if isinstance(space, (Words, OrdWords)):
        return space.base
    raise SetError("word operation over non-word space %r" % (space,))


def _as_ord_word(space, p):
    base = _word_space_base(space)
    if isinstance(p, Word):
        return base, word_to_ord(p)
    if isinstance(p, OrdWord):
        return base, p
    raise SetError("not a word point: %r" % (p,))


def _member_word_open(space, p, u: WordOpen) -> bool:
    base = _word_space_base(space)
    if isinstance(p, Word):
        j = 0
        for part in u.parts:
            while j < len(p.letters) and not _member(base, p.letters[j], part):
                j += 1
            if j == len(p.letters):
                return False
            j += 1
        return True
    if isinstance(p, OrdWord):
        seg = 0
        used = 0  # letters already consumed from the current finite run
        for part in u.parts:
            while seg < len(p.segments):
                letter, count = p.segments[seg]
                exhausted = count.is_finite() and used >= count.to_int()
                if not exhausted and _member(base, letter, part):
                    used += 1
                    break
                seg += 1
                used = 0
            else:
                return False
        return True
    raise SetError("not a word point: %r" % (p,))


def _member_concat_up(space, p, u: ConcatUp) -> bool:
    if isinstance(p, Word):
        for i in range(len(p.letters) + 1):
            if (_member(space, Word(p.letters[:i]), u.left)
                    and _member(space, Word(p.letters[i:]), u.right)):
                return True
        return False
    if isinstance(p, OrdWord):
        for prefix, suffix in ow_cut_pairs(p):
            if (_member(space, prefix, u.left)
                    and _member(space, suffix, u.right)):
                return True
        return False
    raise SetError("not a word point: %r" % (p,))


def _member_tree_open(space, p, u: TreeOpen) -> bool:
    if isinstance(space, Trees) and isinstance(p, TreeNode):
        for sub in _substructures(space, p):
            if (_member(space.base, sub.label, u.root_open)
                    and _member(Words(space), Word(sub.children), u.children_open)):
                return True
        return False
    if isinstance(space, OrdTrees) and isinstance(p, OrdTreeNode):
        for sub in _substructures(space, p):
            if (_member(space.base, sub.label, u.root_open)
                    and _member(OrdWords(space, space.alpha), sub.children,
                                u.children_open)):
                return True
        return False
    raise SetError("TreeOpen needs a tree point")


def _member_rtimes(space, p, u: RTimes) -> bool:
    # Sound always; complete when the inner set is upward closed and the
    # guard is downward closed (true for every constructed instance): the
    # run-initial suffixes then dominate all in-run choices of the position.
    base, word = _as_ord_word(space, p)
    for i, (letter, _) in enumerate(word.segments):
        if not _member_closed(base, letter, u.closed):
            if _member(space, ow_suffix_from(word, i), u.inner):
                return True
    return False


def _member_prefix_concat(space, p, u: PrefixConcat) -> bool:
    base, word = _as_ord_word(space, p)
    if not word.segments:
        return False
    letter, count = word.segments[0]
    if not _member(base, letter, u.letters):
        return False
    rest_count = left_subtract(ONE, count)
    rest = OrdWord(
        ((() if rest_count.is_zero() else ((letter, rest_count),))
         + word.segments[1:]))
    if isinstance(p, Word):
        return _member(space, ord_to_word(rest), u.rest)
    return _member(space, rest, u.rest)


def _substructures(space, p):
    """Suffixes of a word point / subtrees of a tree point, point included."""
    if isinstance(p, Word):
        return tuple(Word(p.letters[i:]) for i in range(len(p.letters) + 1))
    if isinstance(p, OrdWord):
        out = []
        seen = set()
        for i in range(len(p.segments) + 1):
            s = OrdWord(p.segments[i:])
            if s not in seen:
                seen.add(s)
                out.append(s)
        for i, (letter, count) in enumerate(p.segments):
            for rem in right_parts(count):
                if rem.is_zero() or rem == count:
                    continue
                s = OrdWord(((letter, rem),) + p.segments[i + 1:])
                if s not in seen:
                    seen.add(s)
                    out.append(s)
        return tuple(out)
    if isinstance(p, TreeNode):
        out = [p]
        for c in p.children:
            out.extend(_substructures(space, c))
        return tuple(out)
    if isinstance(p, OrdTreeNode):
        out = [p]
        for c, _ in p.children.segments:
            out.extend(_substructures(space, c))
        return tuple(out)
    raise SetError("no substructure order on %r" % (p,))


def member_closed(space: SpaceExpr, p: PointTerm, c: ClosedExpr) -> bool:
    if not typecheck(space, p):
        raise SetError("point %r does not typecheck in %r" % (p, space))
    return _member_closed(space, p, c)


def _member_closed(space, p, c) -> bool:
    if isinstance(c, EmptyC):
        return False
    if isinstance(c, WholeC):
        return True
    if isinstance(c, UnionC):
        return any(_member_closed(space, p, part) for part in c.parts)
    if isinstance(c, IntersectC):
        return all(_member_closed(space, p, part) for part in c.parts)
    if isinstance(c, DownClosure):
        return any(point_leq(space, p, e) for e in c.points)
    if isinstance(c, ComplementOf):
        return not _member(space, p, c.open)
    if isinstance(c, OrdProduct):
        base, word = _as_ord_word(space, p)
        return _match_product(base, c.atoms, word)
    raise SetError("not a closed expression: %r" % (c,))


def _match_product(base, atoms, word: OrdWord) -> bool:
    """Split search: can `word` be written as consecutive chunks matching the
    atom list, with ordinal length bounds per Power atom?"""
    segments = word.segments

    def seg_state(i):
        return (i, segments[i][1]) if i < len(segments) else (i, ZERO)

    seen = set()

    def match(ai: int, si: int, remaining: Ordinal) -> bool:
        key = (ai, si, remaining)
        if key in seen:
            return False
        seen.add(key)
        if ai == len(atoms):
            return si == len(segments)
        atom = atoms[ai]
        if isinstance(atom, AtMostOne):
            if match(ai + 1, si, remaining):
                return True
            if si < len(segments):
                letter = segments[si][0]
                if _member_closed(base, letter, atom.closed):
                    rest = left_subtract(ONE, remaining)
                    if rest.is_zero():
                        nsi, nrem = seg_state(si + 1)
                    else:
                        nsi, nrem = si, rest
                    return match(ai + 1, nsi, nrem)
            return False
        if isinstance(atom, Power):
            return consume(atom, ai, si, remaining, ZERO)
        raise SetError("unknown product atom %r" % (atom,))

    def consume(atom: Power, ai, si, remaining, used: Ordinal) -> bool:
        if cmp(used, atom.beta) < 0 and match(ai + 1, si, remaining):
            return True
        if si >= len(segments):
            return False
        letter = segments[si][0]
        if not _member_closed(base, letter, atom.closed):
            return False
        # Take the whole rest of this run, or stop inside it at one of the
        # finitely many distinct leftovers.  A partial take always consumes
        # the least possible amount for its leftover; taking more can only
        # hurt the length bound, and two partial takes of one run compose
        # into a single one.
        if consume(atom, ai, si + 1, seg_state(si + 1)[1],
                   add(used, remaining)):
            return True
        for rem in right_parts(remaining):
            if rem == remaining or rem.is_zero():
                continue
            taken = _minimal_complement(rem, remaining)
            if cmp(add(used, taken), atom.beta) < 0 and match(ai + 1, si, rem):
                return True
        return False

    si0, rem0 = seg_state(0)
    return match(0, si0, rem0)


def _minimal_complement(rem: Ordinal, total: Ordinal) -> Ordinal:
    from .ordinal import minimal_left
    return minimal_left(rem, total)


# -- normalization and canonical form ----------------------------------------


@lru_cache(maxsize=None)
def open_key(u: OpenExpr):
    """Deterministic structural sort key."""
    return repr(_norm_key(u))


def _norm_key(u):
    if isinstance(u, (Empty, Whole, EmptyC, WholeC)):
        return (type(u).__name__,)
    if isinstance(u, (Union, Intersect, WordOpen, UnionC, IntersectC)):
        return (type(u).__name__, tuple(_norm_key(p) for p in u.parts))
    if isinstance(u, (UpClosure, DownClosure)):
        return (type(u).__name__, tuple(canonical_key(p) for p in u.points))
    if isinstance(u, BaseOpen):
        return ("BaseOpen", tuple(sorted(u.names)))
    if isinstance(u, (Rect, SumOpen, ConcatUp)):
        return (type(u).__name__, _norm_key(u.left), _norm_key(u.right))
    if isinstance(u, TreeOpen):
        return ("TreeOpen", _norm_key(u.root_open), _norm_key(u.children_open))
    if isinstance(u, Triangle):
        from .ordinal import _sort_key
        return ("Triangle", _sort_key(u.beta), _norm_key(u.inner))
    if isinstance(u, RTimes):
        return ("RTimes", _norm_key(u.closed), _norm_key(u.inner))
    if isinstance(u, PrefixConcat):
        return ("PrefixConcat", _norm_key(u.letters), _norm_key(u.rest))
    if isinstance(u, UpSubstructure):
        return ("UpSubstructure", _norm_key(u.inner))
    if isinstance(u, CarrierOpen):
        return ("CarrierOpen", _norm_key(u.closed))
    if isinstance(u, ComplementOf):
        return ("ComplementOf", _norm_key(u.open))
    if isinstance(u, AtMostOne):
        return ("AtMostOne", _norm_key(u.closed))
    if isinstance(u, Power):
        from .ordinal import _sort_key
        return ("Power", _norm_key(u.closed), _sort_key(u.beta))
    if isinstance(u, OrdProduct):
        return ("OrdProduct", tuple(_norm_key(a) for a in u.atoms))
    raise SetError("no key for %r" % (u,))


def normalize_open(u: OpenExpr) -> OpenExpr:
    if isinstance(u, Union):
        parts = []
        for part in (normalize_open(p) for p in u.parts):
            if isinstance(part, Empty):
                continue
            if isinstance(part, Whole):
                return Whole()
            if isinstance(part, Union):
                parts.extend(part.parts)
            else:
                parts.append(part)
        parts = _dedup(parts)
        if not parts:
            return Empty()
        if len(parts) == 1:
            return parts[0]
        return Union(tuple(parts))
    if isinstance(u, Intersect):
        parts = []
        for part in (normalize_open(p) for p in u.parts):
            if isinstance(part, Whole):
                continue
            if isinstance(part, Empty):
                return Empty()
            if isinstance(part, Intersect):
                parts.extend(part.parts)
            else:
                parts.append(part)
        parts = _dedup(parts)
        if not parts:
            return Whole()
        if len(parts) == 1:
            return parts[0]
        return Intersect(tuple(parts))
    if isinstance(u, UpClosure):
        if not u.points:
            return Empty()
        if any(isinstance(p, (Word, OrdWord)) and _is_empty_word(p)
               for p in u.points):
            return Whole()
        return u
    if isinstance(u, WordOpen):
        parts = tuple(normalize_open(p) for p in u.parts)
        if any(isinstance(p, Empty) for p in parts):
            return Empty()
        if not parts:
            return Whole()
        return WordOpen(parts)
    if isinstance(u, ConcatUp):
        left = normalize_open(u.left)
        right = normalize_open(u.right)
        if isinstance(left, Empty) or isinstance(right, Empty):
            return Empty()
        if isinstance(left, Whole):
            return right
        if isinstance(right, Whole):
            return left
        if isinstance(left, WordOpen) and isinstance(right, WordOpen):
            return WordOpen(left.parts + right.parts)
        return ConcatUp(left, right)
    if isinstance(u, Rect):
        left, right = normalize_open(u.left), normalize_open(u.right)
        if isinstance(left, Empty) or isinstance(right, Empty):
            return Empty()
        return Rect(left, right)
    if isinstance(u, SumOpen):
        return SumOpen(normalize_open(u.left), normalize_open(u.right))
    if isinstance(u, TreeOpen):
        root = normalize_open(u.root_open)
        kids = normalize_open(u.children_open)
        if isinstance(root, Empty) or isinstance(kids, Empty):
            return Empty()
        return TreeOpen(root, kids)
    if isinstance(u, Triangle):
        inner = normalize_open(u.inner)
        if u.beta.is_zero() or isinstance(inner, Whole):
            return Whole()
        if isinstance(inner, Empty):
            return Empty()
        return Triangle(u.beta, inner)
    if isinstance(u, RTimes):
        inner = normalize_open(u.inner)
        if isinstance(inner, Empty) or isinstance(u.closed, WholeC):
            return Empty()
        return RTimes(u.closed, inner)
    if isinstance(u, PrefixConcat):
        letters = normalize_open(u.letters)
        rest = normalize_open(u.rest)
        if isinstance(letters, Empty) or isinstance(rest, Empty):
            return Empty()
        return PrefixConcat(letters, rest)
    if isinstance(u, UpSubstructure):
        inner = normalize_open(u.inner)
        if isinstance(inner, Empty):
            return Empty()
        if isinstance(inner, Whole):
            return Whole()
        return UpSubstructure(inner)
    return u


def _dedup(parts):
    seen = set()
    out = []
    for p in parts:
        k = open_key(p)
        if k not in seen:
            seen.add(k)
            out.append(p)
    out.sort(key=open_key)
    return out


def _is_empty_word(p) -> bool:
    if isinstance(p, Word):
        return not p.letters
    if isinstance(p, OrdWord):
        return not p.segments
    return False


# -- extent oracle ------------------------------------------------------------


class ExtentOracle:
    """Brute-force extents over an enumerated universe, memoized per expr.

    Unions, intersections, and one-letter prefix cylinders are computed
    from their parts' extents by set algebra instead of per-point
    membership; everything else falls back to the membership recursion."""

    def __init__(self, space: SpaceExpr, bound: int):
        self.space = space
        self.bound = bound
        self.universe = enumerate_points(space, bound)
        self._universe_set = frozenset(self.universe)
        self._open: Dict[str, frozenset] = {}
        self._closed: Dict[str, frozenset] = {}
        self._up: Optional[Dict[PointTerm, frozenset]] = None

    def _up_sets(self) -> Dict[PointTerm, frozenset]:
        if self._up is None:
            self._up = {
                p: frozenset(q for q in self.universe if point_leq(self.space, p, q))
                for p in self.universe
            }
        return self._up

    def extent(self, s) -> frozenset:
        # Memoized on the expression itself; structurally equal expressions
        # share an entry.
        if _is_closed_expr(s):
            if s not in self._closed:
                self._closed[s] = frozenset(
                    p for p in self.universe if _member_closed(self.space, p, s))
            return self._closed[s]
        if s not in self._open:
            self._open[s] = self._compute_open(s)
        return self._open[s]

    def _compute_open(self, s) -> frozenset:
        if isinstance(s, Empty):
            return frozenset()
        if isinstance(s, Whole):
            return self._universe_set
        if isinstance(s, Union):
            out: frozenset = frozenset()
            for part in s.parts:
                out = out | self.extent(part)
            return out
        if isinstance(s, Intersect):
            out = self._universe_set
            for part in s.parts:
                out = out & self.extent(part)
            return out
        if (isinstance(s, PrefixConcat) and isinstance(s.letters, BaseOpen)
                and isinstance(self.space, Words)):
            rest = self.extent(s.rest)
            out = set()
            for name in s.letters.names:
                head = (Atom(name),)
                for word in rest:
                    glued = Word(head + word.letters)
                    if glued in self._universe_set:
                        out.add(glued)
            return frozenset(out)
        if isinstance(s, ConcatUp) and isinstance(self.space, (Words, OrdWords)):
            # up(LR) restricted to the universe: glue the bounded extents and
            # close upward (anything above a too-long glue is too long too).
            # Concatenation is monotone, so gluing the minimal elements of
            # each side suffices.
            left = self._minimals(self.extent(s.left))
            right = self._minimals(self.extent(s.right))
            ups = self._up_sets()
            out = set()
            for u in left:
                for v in right:
                    glued = self._glue(u, v)
                    if glued in ups:
                        out.update(ups[glued])
            return frozenset(out)
        if isinstance(s, Triangle) and isinstance(self.space, (Words, OrdWords)):
            inner = self.extent(s.inner)
            out = set()
            for p in self.universe:
                _, word = _as_ord_word(self.space, p)
                suffixes = ow_suffixes_strictly_after(word, s.beta)
                if all(self._as_point(q) in inner for q in suffixes):
                    out.add(p)
            return frozenset(out)
        return frozenset(p for p in self.universe
                         if _member(self.space, p, s))

    def _glue(self, u: PointTerm, v: PointTerm) -> PointTerm:
        if isinstance(u, Word):
            return Word(u.letters + v.letters)
        from .space import ord_word
        return ord_word(u.segments + v.segments)

    def _minimals(self, ext: frozenset) -> Tuple[PointTerm, ...]:
        key = ("minimals", ext)
        cached = self._open.get(key)
        if cached is None:
            kept: list = []
            for p in sorted(ext, key=canonical_key):
                if not any(point_leq(self.space, q, p) for q in kept):
                    kept.append(p)
            cached = tuple(kept)
            self._open[key] = cached
        return cached

    def _as_point(self, word: OrdWord) -> PointTerm:
        if isinstance(self.space, Words):
            return ord_to_word(word)
        return word

    def extent_list(self, s) -> Tuple[PointTerm, ...]:
        ext = self.extent(s)
        return tuple(p for p in self.universe if p in ext)


def _is_closed_expr(s) -> bool:
    return isinstance(s, (EmptyC, WholeC, UnionC, IntersectC, DownClosure,
                          ComplementOf, OrdProduct))


_ORACLES: Dict[Tuple[SpaceExpr, int], ExtentOracle] = {}


def oracle_for(space: SpaceExpr, bound: int) -> ExtentOracle:
    key = (space, bound)
    if key not in _ORACLES:
        _ORACLES[key] = ExtentOracle(space, bound)
    return _ORACLES[key]


def extent(space: SpaceExpr, s, bound: int) -> Tuple[PointTerm, ...]:
    """Points of the enumerated universe lying in s, in enumeration order."""
    return oracle_for(space, bound).extent_list(s)


# -- inclusion ----------------------------------------------------------------


@dataclass(frozen=True)
class IncludesResult:
    value: Optional[bool]  # True / False are sound; None is Unknown
    via: str
    bound: Optional[int] = None
    witness: Optional[PointTerm] = None

    def __bool__(self):
        return self.value is True


def includes(space: SpaceExpr, a: OpenExpr, b: OpenExpr,
             bound: Optional[int] = None) -> IncludesResult:
    """Three-valued inclusion a <= b.  Exact on unions of upward closures and
    on letter-pattern word opens; otherwise decided by extents at `bound`
    (the bound is recorded in the result)."""
    a = normalize_open(a)
    b = normalize_open(b)
    if isinstance(a, Empty) or isinstance(b, Whole) or open_key(a) == open_key(b):
        return IncludesResult(True, "syntactic")
    if isinstance(a, Union):
        worst: Optional[IncludesResult] = None
        for part in a.parts:
            r = includes(space, part, b, bound)
            if r.value is not True:
                return r
            if r.bound is not None:
                worst = r
        return worst or IncludesResult(True, "union-left")
    up_a = _as_up_points(a)
    up_b = _as_up_points(b)
    if up_a is not None and up_b is not None:
        for f in up_a:
            if not any(point_leq(space, g, f) for g in up_b):
                return IncludesResult(False, "up-closure", witness=f)
        return IncludesResult(True, "up-closure")
    if isinstance(a, WordOpen) and isinstance(b, WordOpen):
        r = _word_open_rule(space, a, b, bound)
        if r is not None:
            return r
    if isinstance(b, Union):
        for part in b.parts:
            r = includes(space, a, part, bound)
            if r.value is True:
                return IncludesResult(True, "union-right", bound=r.bound)
    if bound is None:
        bound = default_bound()
    try:
        oracle = oracle_for(space, bound)
    except Exception:
        return IncludesResult(None, "no-extent-oracle")
    ea = oracle.extent(a)
    eb = oracle.extent(b)
    diff = ea - eb
    if diff:
        witness = min(diff, key=canonical_key)
        return IncludesResult(False, "extent", bound=bound, witness=witness)
    return IncludesResult(True, "extent", bound=bound)


def _as_up_points(u) -> Optional[Tuple[PointTerm, ...]]:
    if isinstance(u, UpClosure):
        return u.points
    if isinstance(u, Empty):
        return ()
    if isinstance(u, Union):
        points = []
        for part in u.parts:
            sub = _as_up_points(part)
            if sub is None:
                return None
            points.extend(sub)
        return tuple(points)
    return None


def _word_open_rule(space, a: WordOpen, b: WordOpen, bound) -> Optional[IncludesResult]:
    """<U1..Un> <= <V1..Vm> iff a strictly increasing h with U_h(j) <= V_j."""
    base_bound = bound if bound is not None else default_bound()
    base = _word_space_base(space)
    i = 0
    for v in b.parts:
        while i < len(a.parts):
            r = includes(base, a.parts[i], v, base_bound)
            i += 1
            if r.value is True:
                break
        else:
            # A witness needs only one letter per left-hand part.
            oracle = oracle_for(space, max(base_bound, len(a.parts)))
            diff = oracle.extent(a) - oracle.extent(b)
            witness = min(diff, key=canonical_key) if diff else None
            return IncludesResult(False, "wordopen-rule", witness=witness)
    return IncludesResult(True, "wordopen-rule")


def find_good_index(space: SpaceExpr, seq, bound: Optional[int] = None):
    """Least i whose open is included in the union of its predecessors, with
    the inclusion evidence; None if the sequence is bad throughout."""
    for i in range(len(seq)):
        r = includes(space, seq[i], Union(tuple(seq[:i])), bound)
        if r.value is True:
            return i, r
    return None


# -- closures, restriction, specialisation ------------------------------------


def up_closure(space: SpaceExpr, points: Iterable[PointTerm]) -> OpenExpr:
    """Upward closure of finitely many points, with the basis minimized to
    an antichain."""
    points = sorted(set(points), key=canonical_key)
    kept = []
    for p in points:
        if any(point_leq(space, q, p) for q in kept):
            continue
        kept = [q for q in kept if not point_leq(space, p, q)]
        kept.append(p)
    kept.sort(key=canonical_key)
    return normalize_open(UpClosure(tuple(kept)))


def closure_point(space: SpaceExpr, p: PointTerm) -> ClosedExpr:
    """Topological closure of a single point.  Over word spaces this is the
    product of per-letter down-closures (one AtMostOne atom per letter),
    defined for finite-length words; elsewhere it is the down-closure."""
    if isinstance(space, (Words, OrdWords)):
        if isinstance(p, OrdWord):
            p = ord_to_word(p)
        return OrdProduct(tuple(AtMostOne(DownClosure((letter,)))
                                for letter in p.letters))
    return DownClosure((p,))


@dataclass(frozen=True)
class TopologyDesc:
    """A finitely generated topology: a subbasis, optionally cut to a closed
    carrier (the restricted topology tau|H)."""

    space: SpaceExpr
    subbasis: Tuple[OpenExpr, ...]
    carrier: Optional[ClosedExpr] = None

    def effective_subbasis(self) -> Tuple[OpenExpr, ...]:
        if self.carrier is None:
            return self.subbasis
        mark = CarrierOpen(self.carrier)
        return tuple(normalize_open(Intersect((u, mark))) for u in self.subbasis)


def restrict(t: TopologyDesc, h: ClosedExpr, bound: Optional[int] = None,
             require_closed: bool = True) -> TopologyDesc:
    """The subset restriction tau|H: generated by the opens U /\\ H.

    `h` must be closed in t, i.e. its complement must be open in the
    generated topology; this is verified extensionally at `bound` unless
    require_closed is False."""
    if isinstance(h, WholeC):
        return t
    if require_closed:
        b = bound if bound is not None else default_bound()
        if not _closed_in(t, h, b):
            raise SetError("carrier is not closed in the topology at bound %d" % b)
    return TopologyDesc(t.space, t.effective_subbasis(), h)


def _closed_in(t: TopologyDesc, h: ClosedExpr, bound: int) -> bool:
    # Accept carriers whose complement is a generated open, and also any
    # carrier that is downward closed in the embedding order (closed in the
    # Alexandroff refinement every stage topology sits below).
    oracle = oracle_for(t.space, bound)
    ext = oracle.extent(h)
    complement = frozenset(oracle.universe) - ext
    gens = [oracle.extent(u) for u in t.effective_subbasis()]
    if _in_lattice(complement, gens, frozenset(oracle.universe)):
        return True
    return all(x in ext
               for y in ext for x in oracle.universe
               if point_leq(t.space, x, y))


def in_generated_lattice(target: frozenset, gens, whole: frozenset) -> bool:
    """Whether target belongs to the lattice generated by gens (with empty
    and whole) under finite unions and intersections."""
    return _in_lattice(target, gens, whole)


def _in_lattice(target: frozenset, gens, whole: frozenset) -> bool:
    if target == whole or not target:
        return True
    for x in target:
        meet = whole
        for g in gens:
            if x in g:
                meet = meet & g
        if not meet <= target:
            return False
    return True


def spec_leq(t: TopologyDesc, x: PointTerm, y: PointTerm) -> bool:
    """Specialisation preorder of the generated topology: every subbasic open
    containing x contains y."""
    for u in t.effective_subbasis():
        if _member(t.space, x, u) and not _member(t.space, y, u):
            return False
    return True


def spec_leq_restricted(t: TopologyDesc, h: ClosedExpr, x: PointTerm,
                        y: PointTerm, bound: Optional[int] = None,
                        require_closed: bool = True) -> bool:
    """Specialisation preorder of the subset restriction tau|H, computed from
    the definition (not from the closed-carrier shortcut formula)."""
    return spec_leq(restrict(t, h, bound=bound, require_closed=require_closed), x, y)


# -- the ordinal-product complement and the prefix-guard rewrites --------------


def base_complement(base: SpaceExpr, f: ClosedExpr) -> BaseOpen:
    """Complement of a closed subset of a finite base, as a BaseOpen."""
    if not isinstance(base, FiniteQO):
        raise SetError("base complement needs a finite base")
    names = frozenset(n for n in base.elements
                      if not _member_closed(base, Atom(n), f))
    return BaseOpen(names)


def complement_ordinal_product(space: SpaceExpr, p: OrdProduct) -> OpenExpr:
    """Open complement of an ordinal product, built by the right-to-left
    induction: the complement of the empty product {eps} is <Whole>, and
    prepending an atom F (with length bound b) turns a complement U into
    (F |x U) union (b |> U).

    Exponents l+k with a finite part k >= 1 above a limit l are normalized
    to F^{<l} . (F^{<=1})^{k-1}, which has the same finite-length extent;
    on genuinely ordinal-length words the result is only an approximation
    for such exponents."""
    if len(p.atoms) == 1 and isinstance(p.atoms[0], Power):
        atom = p.atoms[0]
        alpha = getattr(space, "alpha", None)
        if isinstance(atom.closed, WholeC) and alpha is not None \
                and cmp(atom.beta, alpha) >= 0:
            return Empty()
    steps = []
    for atom in p.atoms:
        if isinstance(atom, AtMostOne):
            steps.append((atom.closed, ONE))
            continue
        limit, k = limit_finite_split(atom.beta)
        if limit.is_zero():
            steps.extend([(atom.closed, ONE)] * (k - 1))
        else:
            steps.append((atom.closed, limit))
            steps.extend([(atom.closed, ONE)] * max(k - 1, 0))
    u: OpenExpr = WordOpen((Whole(),))
    for f, beta in reversed(steps):
        u = normalize_open(Union((RTimes(f, u), Triangle(beta, u))))
    return u


def rtimes_rewrite(space: SpaceExpr, f: ClosedExpr, u: OpenExpr) -> OpenExpr:
    """Rewrite F |x U into generator form for the three supported U shapes:
    a one-letter pattern <W>, a concatenation closure UV, and a triangle.
    Other shapes raise RewriteShapeError (callers fall back to extents)."""
    base = _word_space_base(space)
    fc = base_complement(base, f)
    u = normalize_open(u)
    if isinstance(u, WordOpen) and len(u.parts) == 1:
        w = u.parts[0]
        return normalize_open(Union((
            WordOpen((Intersect((w, fc)),)),
            WordOpen((fc, w)),
        )))
    if isinstance(u, WordOpen) and len(u.parts) > 1:
        # <W1,...,Wn> = up(<W1> <W2..Wn>); recurse on the head.
        head = WordOpen((u.parts[0],))
        tail = WordOpen(u.parts[1:])
        return normalize_open(ConcatUp(rtimes_rewrite(space, f, head), tail))
    if isinstance(u, ConcatUp):
        return normalize_open(ConcatUp(rtimes_rewrite(space, f, u.left), u.right))
    if isinstance(u, Triangle):
        kind, pred = classify(u.beta)
        if kind == "zero":
            raise RewriteShapeError("triangle exponent must be positive")
        beta2 = u.beta if kind == "limit" else pred
        return normalize_open(
            ConcatUp(WordOpen((fc,)), Triangle(beta2, u.inner)))
    raise RewriteShapeError("unsupported shape for the prefix-guard rewrite: %r"
                            % (u,))
