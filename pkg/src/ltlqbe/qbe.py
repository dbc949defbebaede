"""The separability engine: per-class deciders and witness extraction.

Every separable verdict carries a witness query and is re-verified before
being returned: the witness must lie in the requested class, be certain-true
at 0 on every positive instance, and certain-true on no negative instance.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .core import (
    And,
    Bot,
    DataInstance,
    Diamond,
    ExampleSet,
    LassoModel,
    Next,
    Prop,
    Query,
    QueryClass,
    TOP,
    Until,
    atoms_conj,
    classify,
    conj,
    eval_data,
)
from .horn import HornOntology, Inconsistent, canonical_model, certain_answer, consistent
from .prior import PriorOntology, prior_consistent, prior_entails
from .represent import repr_horn, repr_horn_br, repr_plain, repr_plain_br
from .tsys import (
    BLACK,
    BOT,
    RED,
    Run,
    Tree,
    bisim_quotient,
    contained_in,
    disjoint_union,
    extract_failing_run,
    extract_failing_subtree,
    product,
    prune_dominated_edges,
    simulates,
)
from . import transform

BOT_QUERY = Bot()

PATH_CLASSES = (
    QueryClass.PATH_DIAMOND,
    QueryClass.PATH_NEXT_DIAMOND,
    QueryClass.PATH_DIAMOND_CIRC_BLOCKS,
)
BRANCH_CLASSES = (QueryClass.BRANCH_DIAMOND, QueryClass.BRANCH_NEXT_DIAMOND)
UNTIL_CLASSES = (QueryClass.PATH_UNTIL, QueryClass.SIMPLE_UNTIL, QueryClass.FULL_UNTIL)

_BRANCH_TO_PATH = {
    QueryClass.BRANCH_DIAMOND: QueryClass.PATH_DIAMOND,
    QueryClass.BRANCH_NEXT_DIAMOND: QueryClass.PATH_DIAMOND_CIRC_BLOCKS,
}


class UnsupportedProblem(ValueError):
    pass


class ResourceCap(RuntimeError):
    pass


class WitnessError(AssertionError):
    """A separable verdict failed its own witness re-verification."""


@dataclass(frozen=True)
class Problem:
    cls: QueryClass
    examples: ExampleSet
    ontology: HornOntology | PriorOntology | None = None

    def __post_init__(self):
        if isinstance(self.ontology, PriorOntology) and self.cls not in (
            QueryClass.PATH_DIAMOND,
            QueryClass.BRANCH_DIAMOND,
        ):
            raise UnsupportedProblem(
                "box/diamond ontologies only pair with the diamond path/branch classes"
            )


@dataclass(frozen=True)
class Verdict:
    separable: bool
    witness: Query | None = None
    note: str | None = None


def entailed(ontology, d: DataInstance, q: Query) -> bool:
    """Certain truth of q at 0 on d under the given ontology (or none)."""
    if ontology is None:
        return eval_data(d, q, 0)
    if isinstance(ontology, HornOntology):
        try:
            return certain_answer(ontology, d, q, 0)
        except Inconsistent:
            return True  # no models, so everything is certain
    return prior_entails(ontology, d, q)


def verify_witness(p: Problem, q: Query) -> bool:
    if p.cls not in classify(q):
        return False
    if any(not entailed(p.ontology, d, q) for d in p.examples.positives):
        return False
    return all(not entailed(p.ontology, d, q) for d in p.examples.negatives)


def _checked(p: Problem, verdict: Verdict) -> Verdict:
    if verdict.separable:
        if verdict.witness is None or not verify_witness(p, verdict.witness):
            raise WitnessError(f"witness {verdict.witness} does not separate ({p.cls.value})")
    return verdict


def problem_signature(p: Problem) -> frozenset[str]:
    sig = p.examples.signature
    if isinstance(p.ontology, HornOntology):
        sig |= p.ontology.user_atoms
    elif isinstance(p.ontology, PriorOntology):
        sig |= p.ontology.atoms
    return sig


# ---------------------------------------------------------------------------
# Consistency preprocessing


def _drop_inconsistent(p: Problem) -> tuple[ExampleSet, Verdict | None, str | None]:
    e = p.examples
    if p.ontology is None:
        return e, None, None
    if isinstance(p.ontology, HornOntology):
        onto = p.ontology
        sat = lambda d: consistent(onto, d)
    else:
        onto = p.ontology
        sat = lambda d: prior_consistent(onto, d)
    if any(not sat(d) for d in e.negatives):
        return e, Verdict(False, note="a negative example is inconsistent with the ontology"), None
    positives = tuple(d for d in e.positives if sat(d))
    note = None
    if len(positives) < len(e.positives):
        note = f"dropped {len(e.positives) - len(positives)} inconsistent positive(s)"
    return ExampleSet(positives, e.negatives), None, note


# ---------------------------------------------------------------------------
# Dynamic program for diamond path classes over materialized lasso words


def data_lassos(e: ExampleSet) -> list[LassoModel]:
    return [LassoModel.of_data(d) for d in e.instances]


def dp_path(
    e: ExampleSet,
    models: list[LassoModel],
    cls: QueryClass,
    node_cap: int = 300_000,
    require_nonempty: bool = False,
    max_blocks: int | None = None,
    allow_empty_blocks: bool = False,
    max_anchor_c: int | None = None,
) -> Verdict:
    """Decide diamond-path separability over per-instance certain-truth words.

    A search node holds, per positive, the position its last block occupies
    and, per negative, the least position a matching assignment can occupy
    (None once no assignment survives).  Moves attach one more block: a
    diamond jump to fresh anchors plus a run of next-steps; each slot's
    conjunction is the intersection of the positive letters there, the
    strongest choice, which dominates every alternative.
    """
    if cls not in PATH_CLASSES:
        raise ValueError(f"dp_path does not handle {cls}")
    npos = len(e.positives)
    pos_models = models[:npos]
    neg_models = models[npos:]
    k = max((m.pre for m in models), default=1)
    m_budget = 1
    for mm in models:
        m_budget *= mm.per
    top = k + m_budget
    c_range = range(0, top + 1) if cls is not QueryClass.PATH_DIAMOND else range(0, 1)
    anchored = cls is QueryClass.PATH_NEXT_DIAMOND  # Eq-1 chains: blocks may not overlap
    block_limit = max_blocks if max_blocks is not None else k + len(neg_models) + 2

    horizon = 2 * top + 2
    pos_letters = [[m.letter(i) for i in range(horizon + 1)] for m in pos_models]
    neg_letters = [[m.letter(i) for i in range(horizon + 1)] for m in neg_models]

    def block_slots(anchors: tuple[int, ...], c: int):
        slots = []
        for t in range(c + 1):
            rho = None
            for i, a in enumerate(anchors):
                letters = pos_letters[i][a + t]
                rho = letters if rho is None else rho & letters
            slots.append(rho if rho is not None else frozenset())
        return tuple(slots)

    def neg_advance(j: int, prev: int | None, slots) -> int | None:
        if prev is None:
            return None
        c = len(slots) - 1
        row = neg_letters[j]
        for b in range(min(prev, k) + 1, top + 1):
            if all(slots[t] <= row[b + t] for t in range(c + 1)):
                return b + c if anchored else b
        return None

    parents: dict = {}

    def witness(node) -> Query:
        blocks = []
        cur = node
        while cur is not None:
            prev, slots = parents[cur]
            blocks.append(slots)
            cur = prev
        blocks.reverse()
        return _blocks_to_query(blocks, cls)

    queue: deque = deque()
    anchor_range = c_range if max_anchor_c is None else range(0, max_anchor_c + 1)
    for c in anchor_range:
        slots = block_slots(tuple([0] * npos), c)
        negs = tuple(
            (c if anchored else 0)
            if all(slots[t] <= neg_models[j].letter(t) for t in range(c + 1))
            else None
            for j in range(len(neg_models))
        )
        node = (tuple([c if anchored else 0] * npos), negs)
        accept = all(x is None for x in negs) and bool(slots[-1])
        if node not in parents or accept:
            parents[node] = (None, slots)
            if accept:
                return Verdict(True, witness(node))
            queue.append((node, 0))
    while queue:
        node, depth = queue.popleft()
        if depth >= block_limit:
            continue
        if len(parents) > node_cap:
            raise ResourceCap(f"dp_path exceeded {node_cap} nodes")
        ends, negs = node
        for c in c_range:
            vecs = [()]
            for i in range(npos):
                r = range(min(ends[i], k) + 1, top + 1)
                vecs = [v + (a,) for v in vecs for a in r]
            for anchors in vecs:
                slots = block_slots(anchors, c)
                if not any(slots):
                    if not allow_empty_blocks:
                        continue  # a diamond step may not land on an all-top block
                    if c > 0 and not anchored:
                        continue  # an anchored all-top run adds nothing over c=0
                if require_nonempty and any(not s for s in slots):
                    continue
                new_ends = tuple(a + c if anchored else a for a in anchors)
                new_negs = tuple(neg_advance(j, negs[j], slots) for j in range(len(neg_models)))
                nxt = (new_ends, new_negs)
                accept = all(x is None for x in new_negs) and bool(slots[-1])
                if accept:
                    parents[nxt] = (node, slots)
                    return Verdict(True, witness(nxt))
                if nxt in parents:
                    continue
                parents[nxt] = (node, slots)
                queue.append((nxt, depth + 1))
    return Verdict(False)


def _blocks_to_query(blocks, cls: QueryClass) -> Query:
    if cls is QueryClass.PATH_NEXT_DIAMOND:
        # single spine: the next block's diamond hangs off the last slot
        def spine(i: int) -> Query:
            slots = blocks[i]
            tail = Diamond(spine(i + 1)) if i + 1 < len(blocks) else None
            q: Query = TOP
            for t in range(len(slots) - 1, -1, -1):
                base = atoms_conj(slots[t])
                if t == len(slots) - 1 and tail is not None:
                    q = conj([base, tail])
                else:
                    q = conj([base, Next(q)]) if q is not TOP else base
            return q

        return spine(0)

    def block_query(slots) -> Query:
        q: Query = TOP
        for t in range(len(slots) - 1, -1, -1):
            base = atoms_conj(slots[t])
            q = conj([base, Next(q)]) if q is not TOP else base
        return q

    q: Query = TOP
    for slots in reversed(blocks[1:]):
        inner = block_query(slots)
        q = conj([inner, Diamond(q)]) if q is not TOP else inner
    head = block_query(blocks[0])
    return head if q is TOP else conj([head, Diamond(q)])


# ---------------------------------------------------------------------------
# Horn route for the diamond path classes (depth-first guess realization)


def horn_diamond_search(
    onto: HornOntology, e: ExampleSet, cls: QueryClass, allow_empty_blocks: bool = False
) -> Verdict:
    """Deterministic realization of the guess-a-conjunction algorithm.

    Walks blocks depth-first with memoized (positions, survivors) states;
    certain answers come from the canonical models' lassos, with positions
    past k wrapping through the loops.
    """
    if cls not in PATH_CLASSES:
        raise ValueError(f"horn_diamond_search does not handle {cls}")
    sig = e.signature | onto.user_atoms
    models = [canonical_model(onto, d).lasso.project(sig) for d in e.instances]
    npos = len(e.positives)
    pos_models, neg_models = models[:npos], models[npos:]
    k = max(m.pre for m in models)
    m_budget = 1
    for mm in models:
        m_budget *= mm.per
    top = k + m_budget
    c_range = range(0, top + 1) if cls is not QueryClass.PATH_DIAMOND else range(0, 1)
    anchored = cls is QueryClass.PATH_NEXT_DIAMOND
    depth_cap = k + len(neg_models) + 2
    best_seen: dict = {}

    horizon = 2 * top + 2
    pos_letters = [[m.letter(i) for i in range(horizon + 1)] for m in pos_models]
    neg_letters = [[m.letter(i) for i in range(horizon + 1)] for m in neg_models]

    def block_slots(anchors, c):
        return tuple(
            frozenset.intersection(*(pos_letters[i][a + t] for i, a in enumerate(anchors)))
            for t in range(c + 1)
        )

    def negs_after(negs, slots):
        out = []
        c = len(slots) - 1
        for j, prev in enumerate(negs):
            if prev is None:
                out.append(None)
                continue
            nxt = None
            row = neg_letters[j]
            for b in range(min(prev, k) + 1, top + 1):
                if all(slots[t] <= row[b + t] for t in range(c + 1)):
                    nxt = b + c if anchored else b
                    break
            out.append(nxt)
        return tuple(out)

    def dfs(ends, negs, budget, blocks):
        if all(x is None for x in negs) and blocks and blocks[-1][-1]:
            return list(blocks)
        if budget == 0:
            return None
        key = (ends, negs)
        if best_seen.get(key, -1) >= budget:
            return None
        best_seen[key] = budget
        for c in c_range:
            vecs = [()]
            for i in range(npos):
                r = range(min(ends[i], k) + 1, top + 1)
                vecs = [v + (a,) for v in vecs for a in r]
            for anchors in vecs:
                slots = block_slots(anchors, c)
                if not any(slots):
                    if not allow_empty_blocks:
                        continue  # a diamond step may not land on an all-top block
                    if c > 0 and not anchored:
                        continue
                new_ends = tuple(a + c if anchored else a for a in anchors)
                res = dfs(new_ends, negs_after(negs, slots), budget - 1, blocks + [slots])
                if res is not None:
                    return res
        return None

    for c in c_range:
        slots = tuple(
            frozenset.intersection(*(mm.letter(t) for mm in pos_models)) for t in range(c + 1)
        )
        negs = tuple(
            (c if anchored else 0)
            if all(slots[t] <= neg_models[j].letter(t) for t in range(c + 1))
            else None
            for j in range(len(neg_models))
        )
        res = dfs(tuple([c if anchored else 0] * npos), negs, depth_cap, [slots])
        if res is not None:
            return Verdict(True, _blocks_to_query(res, cls))
    return Verdict(False)


# ---------------------------------------------------------------------------
# Until family via transition systems


def _until_systems(e: ExampleSet, onto: HornOntology | None, cls: QueryClass):
    sig = e.signature | (onto.user_atoms if onto is not None else frozenset())
    if cls is QueryClass.FULL_UNTIL:
        build = (
            (lambda d: repr_plain_br(d, sig))
            if onto is None
            else (lambda d: repr_horn_br(onto, d, sig))
        )
    else:
        build = (
            (lambda d: repr_plain(d, sig)) if onto is None else (lambda d: repr_horn(onto, d, sig))
        )
    def shrink(ts):
        return prune_dominated_edges(bisim_quotient(ts))

    pos = [shrink(build(d)) for d in e.positives]
    neg = [shrink(build(d)) for d in e.negatives]
    prod = bisim_quotient(product(pos, reachable_only=True))
    return prod, disjoint_union(neg)


def decide_until_family(e: ExampleSet, onto: HornOntology | None, cls: QueryClass) -> Verdict:
    if cls not in UNTIL_CLASSES:
        raise ValueError(f"decide_until_family does not handle {cls}")
    if not e.positives:
        raise ValueError("need at least one positive example")
    if not e.negatives:
        return Verdict(True, TOP)
    prod, union = _until_systems(e, onto, cls)
    if cls is QueryClass.PATH_UNTIL:
        if contained_in(prod, union):
            return Verdict(False)
        return Verdict(True, query_from_run(extract_failing_run(prod, union)))
    if simulates(prod, union):
        return Verdict(False)
    return Verdict(True, query_from_tree(extract_failing_subtree(prod, union)))


def _edge_conj(label: frozenset[str]) -> Query:
    if BOT in label:
        return BOT_QUERY
    return atoms_conj(label)


def query_from_run(run: Run) -> Query:
    """The until-path query spelled by a run's node and edge labels."""
    n = len(run.node_labels)
    q: Query = atoms_conj(run.node_labels[n - 1] - {BOT})
    for i in range(n - 2, -1, -1):
        step = Until(_edge_conj(run.edge_labels[i]), q)
        q = conj([atoms_conj(run.node_labels[i] - {BOT}), step])
    return q


def query_from_tree(tree: Tree) -> Query:
    """The until query spelled by a black/red tree (black: right side, red: left)."""

    def edge_query(label: frozenset[str], child: Tree) -> Query:
        gamma = atoms_conj(child.label - {BOT})
        blacks = [edge_query(lab, c) for lab, color, c in child.children if color == BLACK]
        reds = [edge_query(lab, c) for lab, color, c in child.children if color == RED]
        left = conj([_edge_conj(label)] + reds)
        right = conj([gamma] + blacks)
        return Until(left, right)

    if any(color == RED for _, color, _ in tree.children):
        raise ValueError("red edge out of a tree root")
    gamma = atoms_conj(tree.label - {BOT})
    blacks = [edge_query(lab, child) for lab, color, child in tree.children]
    return conj([gamma] + blacks)


# ---------------------------------------------------------------------------
# Diamond classes under box/diamond ontologies


def prior_path_search(
    onto: PriorOntology, e: ExampleSet, cls: QueryClass, node_cap: int = 100_000
) -> Verdict:
    """Bounded exhaustive search for a separating diamond path.

    A prefix that is not certain-true on some positive cannot be repaired by
    extending it (extensions are stronger), so the search prunes there.
    """
    if cls is QueryClass.BRANCH_DIAMOND:
        parts = []
        for sub in transform.split_per_negative(e):
            v = prior_path_search(onto, sub, QueryClass.PATH_DIAMOND, node_cap)
            if not v.separable:
                return Verdict(False)
            parts.append(v.witness)
        return Verdict(True, conj(parts) if parts else TOP)
    if cls is not QueryClass.PATH_DIAMOND:
        raise UnsupportedProblem(f"{cls.value} is not supported under box/diamond ontologies")
    if not e.negatives:
        return Verdict(True, TOP)
    sig = sorted(e.signature | onto.atoms)
    depth = max(d.max_timestamp for d in e.negatives) + max(onto.size_measure, 1) + 1
    rho_candidates = _subset_candidates(sig)

    def build(prefix) -> Query:
        q: Query = TOP
        for rho in reversed(prefix[1:]):
            inner = atoms_conj(rho)
            q = conj([inner, Diamond(q)]) if q is not TOP else inner
        head = atoms_conj(prefix[0])
        return head if q is TOP else conj([head, Diamond(q)])

    explored = 0
    queue: deque = deque((rho0,) for rho0 in rho_candidates)
    while queue:
        prefix = queue.popleft()
        explored += 1
        if explored > node_cap:
            raise ResourceCap("prior path search exceeded its node cap")
        q = build(prefix)
        if any(not prior_entails(onto, d, q) for d in e.positives):
            continue
        if all(not prior_entails(onto, d, q) for d in e.negatives):
            return Verdict(True, q)
        if len(prefix) <= depth:
            queue.extend(prefix + (rho,) for rho in rho_candidates)
    return Verdict(False)


def _subset_candidates(sig: list[str]):
    out = []
    for mask in range(1 << len(sig)):
        out.append(frozenset(sig[i] for i in range(len(sig)) if mask >> i & 1))
    out.sort(key=lambda s: (len(s), tuple(sorted(s))))
    return out


# ---------------------------------------------------------------------------
# The facade


def decide(p: Problem) -> Verdict:
    e, early, note = _drop_inconsistent(p)
    if early is not None:
        return early
    sub = Problem(p.cls, e, p.ontology)
    if not e.positives:
        # every query is certain-true on zero positives; false never is on
        # a consistent negative
        return _checked(sub, Verdict(True, BOT_QUERY, note=note))
    if not e.negatives:
        return _checked(sub, Verdict(True, TOP, note=note))
    if isinstance(p.ontology, PriorOntology):
        verdict = prior_path_search(p.ontology, e, p.cls)
    elif p.cls in PATH_CLASSES:
        if p.ontology is None:
            verdict = dp_path(e, data_lassos(e), p.cls)
        else:
            verdict = horn_diamond_search(p.ontology, e, p.cls)
    elif p.cls in BRANCH_CLASSES:
        verdict = _decide_branch(p, e)
    elif p.cls in UNTIL_CLASSES:
        verdict = decide_until_family(e, p.ontology, p.cls)
    else:
        raise UnsupportedProblem(str(p.cls))
    if note and verdict.note is None:
        verdict = Verdict(verdict.separable, verdict.witness, note)
    return _checked(sub, verdict)


def _decide_branch(p: Problem, e: ExampleSet) -> Verdict:
    path_cls = _BRANCH_TO_PATH[p.cls]
    parts = []
    for sub in transform.split_per_negative(e):
        # the branching classes place no restriction on all-top blocks
        if p.ontology is None:
            v = dp_path(sub, data_lassos(sub), path_cls, allow_empty_blocks=True)
        else:
            v = horn_diamond_search(p.ontology, sub, path_cls, allow_empty_blocks=True)
        if not v.separable:
            return Verdict(False)
        parts.append(v.witness)
    return Verdict(True, conj(parts) if parts else TOP)


def minimize_witness(p: Problem, q: Query) -> Query:
    """Greedily drop conjuncts and temporal steps while the witness verifies."""
    changed = True
    while changed:
        changed = False
        for candidate in _reductions(q):
            if p.cls in classify(candidate) and verify_witness(p, candidate):
                q = candidate
                changed = True
                break
    return q


def _reductions(q: Query):
    if isinstance(q, And):
        for i in range(len(q.parts)):
            yield conj(q.parts[:i] + q.parts[i + 1 :])
        for i, part in enumerate(q.parts):
            for sub in _reductions(part):
                yield conj(q.parts[:i] + (sub,) + q.parts[i + 1 :])
    elif isinstance(q, (Next, Diamond)):
        yield q.arg
        for sub in _reductions(q.arg):
            yield type(q)(sub)
    elif isinstance(q, Until):
        yield q.right
        yield Diamond(q.right)
        for sub in _reductions(q.right):
            yield Until(q.left, sub)
        for sub in _reductions(q.left):
            yield Until(sub, q.right)
    elif isinstance(q, Prop):
        yield TOP
