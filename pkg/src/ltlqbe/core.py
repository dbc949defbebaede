"""Domain types: timestamped data, positive LTL queries, example sets, lasso words.

All temporal operators are strict: X, F and U quantify over strictly later
timepoints, and X q == false U q, F q == true U q.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

ATOM_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

# Words reserved by the query / ontology grammars; they cannot name atoms.
RESERVED_WORDS = frozenset({"X", "F", "G", "U", "true", "false"})


def check_atom_name(name: str) -> str:
    if not ATOM_NAME.match(name) or name in RESERVED_WORDS:
        raise ValueError(f"bad atom name: {name!r}")
    return name


class QueryClass(Enum):
    PATH_DIAMOND = "path-diamond"
    PATH_NEXT_DIAMOND = "path-next-diamond"
    PATH_DIAMOND_CIRC_BLOCKS = "path-diamond-circ-blocks"
    BRANCH_DIAMOND = "branch-diamond"
    BRANCH_NEXT_DIAMOND = "branch-next-diamond"
    PATH_UNTIL = "path-until"
    SIMPLE_UNTIL = "simple-until"
    FULL_UNTIL = "full-until"


# ---------------------------------------------------------------------------
# Query ASTs


class Query:
    """Base class for positive LTL queries (atoms, true, false, &, X, F, U)."""

    def __str__(self) -> str:
        return format_query(self)

    def __repr__(self) -> str:
        return f"<query {format_query(self)}>"


@dataclass(frozen=True, repr=False)
class Top(Query):
    pass


@dataclass(frozen=True, repr=False)
class Bot(Query):
    pass


@dataclass(frozen=True, repr=False)
class Prop(Query):
    name: str

    def __post_init__(self):
        check_atom_name(self.name)


@dataclass(frozen=True, repr=False)
class And(Query):
    parts: tuple[Query, ...]

    def __post_init__(self):
        if not self.parts:
            raise ValueError("And must have at least one conjunct")
        if any(isinstance(p, And) for p in self.parts):
            raise ValueError("And must be flattened; use conj()")


@dataclass(frozen=True, repr=False)
class Next(Query):
    arg: Query


@dataclass(frozen=True, repr=False)
class Diamond(Query):
    arg: Query


@dataclass(frozen=True, repr=False)
class Until(Query):
    left: Query
    right: Query


TOP = Top()
BOT = Bot()


def conj(parts: Iterable[Query]) -> Query:
    """Conjunction with flattening, deduplication and unit/zero simplification."""
    flat: list[Query] = []
    seen = set()
    for p in parts:
        items = p.parts if isinstance(p, And) else (p,)
        for q in items:
            if isinstance(q, Bot):
                return BOT
            if isinstance(q, Top) or q in seen:
                continue
            seen.add(q)
            flat.append(q)
    if not flat:
        return TOP
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def atoms_conj(names: Iterable[str]) -> Query:
    return conj(Prop(n) for n in sorted(set(names)))


def temporal_depth(q: Query) -> int:
    """Maximum nesting of X / F / U in q."""
    if isinstance(q, (Top, Bot, Prop)):
        return 0
    if isinstance(q, And):
        return max(temporal_depth(p) for p in q.parts)
    if isinstance(q, (Next, Diamond)):
        return 1 + temporal_depth(q.arg)
    if isinstance(q, Until):
        return 1 + max(temporal_depth(q.left), temporal_depth(q.right))
    raise TypeError(f"not a query: {q!r}")


def query_atoms(q: Query) -> frozenset[str]:
    if isinstance(q, Prop):
        return frozenset({q.name})
    if isinstance(q, And):
        return frozenset().union(*(query_atoms(p) for p in q.parts))
    if isinstance(q, (Next, Diamond)):
        return query_atoms(q.arg)
    if isinstance(q, Until):
        return query_atoms(q.left) | query_atoms(q.right)
    return frozenset()


def subqueries(q: Query) -> Iterator[Query]:
    yield q
    if isinstance(q, And):
        for p in q.parts:
            yield from subqueries(p)
    elif isinstance(q, (Next, Diamond)):
        yield from subqueries(q.arg)
    elif isinstance(q, Until):
        yield from subqueries(q.left)
        yield from subqueries(q.right)


# ---------------------------------------------------------------------------
# Data instances, example sets, lasso words


@dataclass(frozen=True)
class DataInstance:
    """A finite set of (atom, timestamp) facts."""

    facts: frozenset[tuple[str, int]]

    def __post_init__(self):
        for name, t in self.facts:
            check_atom_name(name)
            if t < 0:
                raise ValueError(f"negative timestamp in fact {name}({t})")

    @staticmethod
    def of(pairs: Iterable[tuple[str, int]]) -> "DataInstance":
        return DataInstance(frozenset(pairs))

    @property
    def max_timestamp(self) -> int:
        return max((t for _, t in self.facts), default=0)

    @property
    def signature(self) -> frozenset[str]:
        return frozenset(name for name, _ in self.facts)

    def atoms_at(self, t: int) -> frozenset[str]:
        return frozenset(name for name, u in self.facts if u == t)

    def shifted(self, offset: int) -> "DataInstance":
        return DataInstance(frozenset((a, t + offset) for a, t in self.facts))

    def __le__(self, other: "DataInstance") -> bool:
        return self.facts <= other.facts


@dataclass(frozen=True)
class ExampleSet:
    positives: tuple[DataInstance, ...]
    negatives: tuple[DataInstance, ...]

    @staticmethod
    def of(positives: Iterable[DataInstance], negatives: Iterable[DataInstance]) -> "ExampleSet":
        return ExampleSet(tuple(positives), tuple(negatives))

    @property
    def instances(self) -> tuple[DataInstance, ...]:
        return self.positives + self.negatives

    @property
    def signature(self) -> frozenset[str]:
        sigs = [d.signature for d in self.instances]
        return frozenset().union(*sigs) if sigs else frozenset()


@dataclass(frozen=True)
class LassoModel:
    """An ultimately periodic word: `prefix` then `loop` repeated forever."""

    prefix: tuple[frozenset[str], ...]
    loop: tuple[frozenset[str], ...]

    def __post_init__(self):
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")

    @property
    def pre(self) -> int:
        return len(self.prefix)

    @property
    def per(self) -> int:
        return len(self.loop)

    def fold(self, n: int) -> int:
        """Representative position in [0, pre+per) of timepoint n."""
        if n < self.pre + self.per:
            return n
        return self.pre + (n - self.pre) % self.per

    def letter(self, n: int) -> frozenset[str]:
        if n < self.pre:
            return self.prefix[n]
        return self.loop[(n - self.pre) % self.per]

    def project(self, signature: frozenset[str]) -> "LassoModel":
        return LassoModel(
            tuple(s & signature for s in self.prefix),
            tuple(s & signature for s in self.loop),
        )

    @staticmethod
    def of_data(d: DataInstance) -> "LassoModel":
        """The word that makes exactly d's facts true (empty from max+1 on)."""
        pre = d.max_timestamp + 1
        return LassoModel(tuple(d.atoms_at(t) for t in range(pre)), (frozenset(),))


# ---------------------------------------------------------------------------
# Evaluation


def eval_data(d: DataInstance, q: Query, at: int) -> bool:
    """Truth of q at timepoint `at` in the word making exactly d's facts true.

    Positions beyond max_timestamp are all alike (no atoms hold), so every
    subquery has one truth value there; position H = max+1 stands for them.
    """
    h = d.max_timestamp + 1
    table: dict[tuple[Query, int], bool] = {}

    def ev(query: Query, n: int) -> bool:
        n = min(n, h)
        key = (query, n)
        val = table.get(key)
        if val is None:
            val = _ev_data(query, n)
            table[key] = val
        return val

    def _ev_data(query: Query, n: int) -> bool:
        if isinstance(query, Top):
            return True
        if isinstance(query, Bot):
            return False
        if isinstance(query, Prop):
            return n <= d.max_timestamp and (query.name, n) in d.facts
        if isinstance(query, And):
            return all(ev(p, n) for p in query.parts)
        if isinstance(query, Next):
            return ev(query.arg, n + 1)
        if isinstance(query, Diamond):
            return any(ev(query.arg, m) for m in range(n + 1, h + 1)) or ev(query.arg, h)
        if isinstance(query, Until):
            if n >= h:
                # the immediate successor is again the all-empty class
                return ev(query.right, h)
            m = n + 1
            while m <= h:
                if ev(query.right, m):
                    return True
                if not ev(query.left, m):
                    return False
                m += 1
            # all later positions look like h; right was already false there
            return False
        raise TypeError(f"not a query: {query!r}")

    return ev(q, at)


def eval_lasso(model: LassoModel, q: Query, at: int) -> bool:
    """Truth of q at `at` in the infinite word denoted by the lasso."""
    pre, per = model.pre, model.per
    if at >= pre + per:
        raise ValueError(f"evaluation point {at} outside lasso representation")
    table: dict[tuple[Query, int], bool] = {}

    def succ(n: int) -> int:
        n += 1
        return n if n < pre + per else pre

    def ev(query: Query, n: int) -> bool:
        key = (query, n)
        val = table.get(key)
        if val is None:
            val = _ev(query, n)
            table[key] = val
        return val

    def _ev(query: Query, n: int) -> bool:
        if isinstance(query, Top):
            return True
        if isinstance(query, Bot):
            return False
        if isinstance(query, Prop):
            return query.name in model.letter(n)
        if isinstance(query, And):
            return all(ev(p, n) for p in query.parts)
        if isinstance(query, Next):
            return ev(query.arg, succ(n))
        if isinstance(query, Diamond):
            later = set(range(n + 1, pre + per)) | set(range(pre, pre + per))
            return any(ev(query.arg, m) for m in later)
        if isinstance(query, Until):
            # walk forward through position classes; after one full cycle in
            # the loop with `left` intact and `right` absent, nothing changes
            m = succ(n)
            for _ in range(pre + 2 * per + 2):
                if ev(query.right, m):
                    return True
                if not ev(query.left, m):
                    return False
                m = succ(m)
            return False
        raise TypeError(f"not a query: {query!r}")

    return ev(q, at)


# ---------------------------------------------------------------------------
# Class membership


def _split_conj(q: Query) -> tuple[frozenset[str], bool, list[Query]]:
    """(atom conjuncts, has_bot, temporal conjuncts) of a flattened query."""
    parts = q.parts if isinstance(q, And) else (q,)
    atoms: set[str] = set()
    temporal: list[Query] = []
    has_bot = False
    for p in parts:
        if isinstance(p, Prop):
            atoms.add(p.name)
        elif isinstance(p, Bot):
            has_bot = True
        elif isinstance(p, Top):
            pass
        else:
            temporal.append(p)
    return frozenset(atoms), has_bot, temporal


def _is_atom_conj(q: Query, allow_bot: bool = False) -> bool:
    _, has_bot, temporal = _split_conj(q)
    return not temporal and (allow_bot or not has_bot)


def _is_path_next(q: Query) -> bool:
    """Single X-spine: rho0 & X(rho1 & X(...))."""
    _, _, temporal = _split_conj(q)
    if len(temporal) > 1:
        return False
    if not temporal:
        return True
    step = temporal[0]
    return isinstance(step, Next) and _is_path_next(step.arg)


def _is_path(q: Query, ops: tuple[type, ...], need_atom: bool = False) -> bool:
    """Single temporal spine; every F must land on a block with an atom.

    The block of an F-step runs until the next F; all-empty blocks would let
    F-nesting count depth like X does, which the diamond classes forbid.
    """
    atoms, _, temporal = _split_conj(q)
    if len(temporal) > 1:
        return False
    need = need_atom and not atoms
    if not temporal:
        return not need
    step = temporal[0]
    if not isinstance(step, ops):
        return False
    if isinstance(step, Diamond):
        return not need and _is_path(step.arg, ops, need_atom=True)
    return _is_path(step.arg, ops, need_atom=need)


def _is_path_until(q: Query) -> bool:
    """Until-path shape: a single until spine whose left sides are atom
    conjunctions or false (X and F are sugar for such untils)."""
    _, _, temporal = _split_conj(q)
    if len(temporal) > 1:
        return False
    if not temporal:
        return True
    step = temporal[0]
    if isinstance(step, (Next, Diamond)):
        return _is_path_until(step.arg)
    if isinstance(step, Until):
        return _is_atom_conj(step.left, allow_bot=True) and _is_path_until(step.right)
    return False


def _x_chain_atoms(q: Query) -> frozenset[str] | None:
    """Atoms of a single-X-spine query, or None when it is not one."""
    atoms, _, temporal = _split_conj(q)
    if len(temporal) > 1:
        return None
    if not temporal:
        return atoms
    step = temporal[0]
    if not isinstance(step, Next):
        return None
    inner = _x_chain_atoms(step.arg)
    return None if inner is None else atoms | inner


def _is_circ_blocks(q: Query, need_atom: bool = False) -> bool:
    """Shape rho0 & F(rho1 & F(...)) where each rho_i is an X-path.

    F-steps must land on a block containing some atom (see _is_path).
    """
    parts = q.parts if isinstance(q, And) else (q,)
    diamonds = [p for p in parts if isinstance(p, Diamond)]
    rest = [p for p in parts if not isinstance(p, Diamond)]
    if len(diamonds) > 1:
        return False
    block = _x_chain_atoms(conj(rest)) if rest else frozenset()
    if block is None or (need_atom and not block):
        return False
    return not diamonds or _is_circ_blocks(diamonds[0].arg, need_atom=True)


def _is_simple(q: Query) -> bool:
    """Tree-shaped until queries: left arguments are atom conjunctions or
    false (X and F abbreviate such untils, so they may not sit on a left)."""
    if isinstance(q, Until):
        return _is_atom_conj(q.left, allow_bot=True) and _is_simple(q.right)
    if isinstance(q, And):
        return all(_is_simple(p) for p in q.parts)
    if isinstance(q, (Next, Diamond)):
        return _is_simple(q.arg)
    return True


def _has_node(q: Query, kinds: tuple[type, ...]) -> bool:
    return any(isinstance(s, kinds) for s in subqueries(q))


def classify(q: Query) -> frozenset[QueryClass]:
    """All query classes whose syntactic shape q matches."""
    out = {QueryClass.FULL_UNTIL}
    if _is_simple(q):
        out.add(QueryClass.SIMPLE_UNTIL)
    if _is_path_until(q):
        out.add(QueryClass.PATH_UNTIL)
    if not _has_node(q, (Until,)):
        out.add(QueryClass.BRANCH_NEXT_DIAMOND)
        if not _has_node(q, (Next,)):
            out.add(QueryClass.BRANCH_DIAMOND)
        if _is_path(q, (Next, Diamond)):
            out.add(QueryClass.PATH_NEXT_DIAMOND)
        if _is_path(q, (Diamond,)):
            out.add(QueryClass.PATH_DIAMOND)
        if _is_circ_blocks(q):
            out.add(QueryClass.PATH_DIAMOND_CIRC_BLOCKS)
    if isinstance(q, Bot):
        # operator-free, hence a member of every class
        out = set(QueryClass)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Rewriting Q[X,F] queries into conjunctions of diamond paths of X-blocks

_Block = tuple[frozenset[str], ...]
_Path = tuple[_Block, ...]


def _block_union(a: _Block, b: _Block) -> _Block:
    n = max(len(a), len(b))
    pad = (frozenset(),)
    a += pad * (n - len(a))
    b += pad * (n - len(b))
    return tuple(x | y for x, y in zip(a, b))


def _norm(q: Query) -> list[_Path] | None:
    """Paths whose conjunction is equivalent to q; None encodes false."""
    if isinstance(q, Bot):
        return None
    if isinstance(q, Top):
        return [((frozenset(),),)]
    if isinstance(q, Prop):
        return [((frozenset({q.name}),),)]
    if isinstance(q, And):
        acc: list[_Path] = []
        for p in q.parts:
            sub = _norm(p)
            if sub is None:
                return None
            acc.extend(sub)
        merged = _block_union(acc[0][0], acc[0][0])
        for path in acc:
            merged = _block_union(merged, path[0])
        out = [(merged,) + path[1:] for path in acc if len(path) > 1]
        return _dedup(out) if out else [(merged,)]
    if isinstance(q, Next):
        sub = _norm(q.arg)
        if sub is None:
            return None
        shift = (frozenset(),)
        return _dedup([tuple(shift + b for b in path) for path in sub])
    if isinstance(q, Diamond):
        sub = _norm(q.arg)
        if sub is None:
            return None
        head = sub[0][0]
        for path in sub:
            head = _block_union(head, path[0])
        top = (frozenset(),)
        out = [(top, head) + path[1:] for path in sub if len(path) > 1]
        return _dedup(out) if out else [(top, head)]
    raise ValueError(f"query outside Q[X,F]: {q}")


def _dedup(paths: list[_Path]) -> list[_Path]:
    seen = set()
    out = []
    for p in paths:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _block_query(block: _Block) -> Query:
    # right-nested X-chain: slot_0 & X(slot_1 & X(...))
    q: Query = TOP
    for i in range(len(block) - 1, -1, -1):
        base = atoms_conj(block[i])
        q = conj([base, Next(q)]) if q is not TOP else base
    return q


def _path_query(path: _Path) -> Query:
    q: Query = TOP
    for block in reversed(path[1:]):
        inner = conj([_block_query(block), Diamond(q)]) if q is not TOP else _block_query(block)
        q = inner
    head = _block_query(path[0])
    if q is TOP:
        return head
    return conj([head, Diamond(q)])


def normalize_next_diamond(q: Query) -> list[Query]:
    """Rewrite an X/F-query into an equivalent list of diamond paths of X-blocks.

    Uses X F k == F X k, X(a & b) == Xa & Xb and the distribution of
    conjunctions under F; rejects queries containing U.
    """
    if _has_node(q, (Until,)):
        raise ValueError("normalize_next_diamond: query contains U")
    paths = _norm(q)
    if paths is None:
        return [BOT]
    out = [_path_query(p) for p in paths]
    nontrivial = [p for p in out if p is not TOP]
    return nontrivial or [TOP]


# ---------------------------------------------------------------------------
# Query text grammar


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at column {pos + 1})")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<amp>&)|(?P<lp>\()|(?P<rp>\)))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            if text[i:].strip():
                raise ParseError(f"unexpected character {text[i:].lstrip()[0]!r}", i)
            break
        kind = m.lastgroup
        value = m.group(kind)
        tokens.append((kind, value, m.start(kind)))
        i = m.end()
    return tokens


class _QueryParser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.text = text

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self) -> Query:
        q = self.until()
        kind, value, pos = self.peek()
        if kind is not None:
            raise ParseError(f"unexpected {value!r}", pos)
        return q

    def until(self) -> Query:
        left = self.conj()
        kind, value, _ = self.peek()
        if kind == "name" and value == "U":
            self.take()
            return Until(left, self.until())
        return left

    def conj(self) -> Query:
        parts = [self.unary()]
        while True:
            kind, _, _ = self.peek()
            if kind != "amp":
                break
            self.take()
            parts.append(self.unary())
        return conj(parts)

    def unary(self) -> Query:
        kind, value, pos = self.peek()
        if kind == "name" and value == "X":
            self.take()
            return Next(self.unary())
        if kind == "name" and value == "F":
            self.take()
            return Diamond(self.unary())
        return self.primary()

    def primary(self) -> Query:
        kind, value, pos = self.take()
        if kind == "lp":
            q = self.until()
            kind, value, pos = self.take()
            if kind != "rp":
                raise ParseError("expected ')'", pos)
            return q
        if kind == "name":
            if value == "true":
                return TOP
            if value == "false":
                return BOT
            if value in RESERVED_WORDS:
                raise ParseError(f"misplaced keyword {value!r}", pos)
            return Prop(value)
        raise ParseError("expected a query", pos)


def parse_query(text: str) -> Query:
    return _QueryParser(text).parse()


def format_query(q: Query) -> str:
    def fmt(query: Query, level: int) -> str:
        # level 0 = U context, 1 = & context, 2 = unary argument
        if isinstance(query, Top):
            return "true"
        if isinstance(query, Bot):
            return "false"
        if isinstance(query, Prop):
            return query.name
        if isinstance(query, Next):
            return _wrap(f"X {fmt(query.arg, 2)}", level > 2)
        if isinstance(query, Diamond):
            return _wrap(f"F {fmt(query.arg, 2)}", level > 2)
        if isinstance(query, And):
            body = " & ".join(fmt(p, 2) for p in query.parts)
            return _wrap(body, level > 1)
        if isinstance(query, Until):
            body = f"{fmt(query.left, 1)} U {fmt(query.right, 0)}"
            return _wrap(body, level > 0)
        raise TypeError(f"not a query: {query!r}")

    def _wrap(s: str, need: bool) -> str:
        return f"({s})" if need else s

    return fmt(q, 0)
