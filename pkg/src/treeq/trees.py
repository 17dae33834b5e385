"""Hierarchical partition trees over parameter and state spaces.

Both trees partition a box of half-open intervals. Interior nodes were
either split uniformly (axis-aligned bisection; a point on a split midpoint
belongs to the upper child, everywhere) or, for the state tree only,
flexibly (children are the cells of a trained classifier; membership is
defined operationally by prediction, which guarantees a partition even when
the learned boundary is complex).

Trees are mutated only between episodes (refinement) and read during
episodes; instances can be handed between threads but never shared for
concurrent mutation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import DISCRETE, ActionSchema, VariableSpec
from .errors import MalformedTree, UnsplittableLeaf
from .svm import SvmClassifier

# A continuous interval narrower than this fraction of its original domain
# width is never split again; guards against unbounded refinement.
MIN_WIDTH_FRACTION = 1e-3

DUMP_VERSION = 1


@dataclass
class TreeNode:
    """One node of a partition tree. The box is the node's bounding region;
    for classifier cells the true region is the parent box intersected with
    the classifier's cell for `class_label`."""

    id: int
    parent: int | None
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    children: list[int] = field(default_factory=list)
    # uniform-split bookkeeping (set on the parent when it splits)
    split_dims: tuple[int, ...] | None = None
    split_mids: tuple[float, ...] | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def box_contains(self, point: Sequence[float]) -> bool:
        lo, hi = self.lo, self.hi
        for i, v in enumerate(point):
            if not (lo[i] <= v < hi[i]):
                return False
        return True


def _splittable(spec: VariableSpec, lo: float, hi: float) -> bool:
    if spec.kind == DISCRETE:
        return hi - lo >= 2
    return (hi - lo) > MIN_WIDTH_FRACTION * spec.width


def _midpoint(spec: VariableSpec, lo: float, hi: float) -> float:
    if spec.kind == DISCRETE:
        # lower child takes the lower ceil(k/2) codes
        return lo + math.ceil((hi - lo) / 2)
    return 0.5 * (lo + hi)


def _child_boxes(
    lo: tuple[float, ...],
    hi: tuple[float, ...],
    dims: Sequence[int],
    mids: Sequence[float],
) -> list[tuple[tuple[float, ...], tuple[float, ...]]]:
    """Cross-product boxes of bisecting `dims` at `mids`. Child index `c`
    holds the upper half of dims[i] exactly when bit i of c is set."""
    boxes = []
    for code in range(1 << len(dims)):
        clo, chi = list(lo), list(hi)
        for i, d in enumerate(dims):
            if code >> i & 1:
                clo[d] = mids[i]
            else:
                chi[d] = mids[i]
        boxes.append((tuple(clo), tuple(chi)))
    return boxes


def _descend_uniform(node: TreeNode, point: Sequence[float]) -> int:
    code = 0
    for i, d in enumerate(node.split_dims):
        if point[d] >= node.split_mids[i]:
            code |= 1 << i
    return node.children[code]


class ParamTree:
    """Partition tree over one action's parameter space (uniform splits
    only). A parameterless action gets the degenerate zero-dimensional tree
    with a single permanent leaf."""

    def __init__(self, schema: ActionSchema):
        self.schema = schema
        self.nodes: dict[int, TreeNode] = {}
        self._next_id = 0
        lo = tuple(p.lo for p in schema.params)
        hi = tuple(p.hi for p in schema.params)
        self.root = self._new_node(None, lo, hi)
        self.leaf_ids: list[int] = [self.root]

    def _new_node(self, parent: int | None, lo, hi) -> int:
        nid = self._next_id
        self._next_id += 1
        self.nodes[nid] = TreeNode(nid, parent, lo, hi)
        return nid

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_ids)

    def leaf_of(self, args: Sequence[float]) -> int:
        """Unique leaf whose box contains `args` (half-open tests)."""
        node = self.nodes[self.root]
        while node.children:
            node = self.nodes[_descend_uniform(node, args)]
        return node.id

    def sample(self, leaf_id: int, rng: np.random.Generator) -> tuple[float, ...]:
        """Uniform draw from the leaf box; discrete dimensions draw an
        integer code uniformly."""
        node = self.nodes[leaf_id]
        out = []
        for i, p in enumerate(self.schema.params):
            if p.kind == DISCRETE:
                out.append(float(rng.integers(int(node.lo[i]), int(node.hi[i]))))
            else:
                out.append(rng.uniform(node.lo[i], node.hi[i]))
        return tuple(out)

    def refine_uniform(self, leaf_id: int) -> list[int]:
        """Bisect every splittable dimension of the leaf at its midpoint.
        Returns the new child ids."""
        node = self.nodes[leaf_id]
        if not node.is_leaf:
            raise UnsplittableLeaf(f"node {leaf_id} is not a leaf")
        dims = [
            i
            for i, p in enumerate(self.schema.params)
            if _splittable(p, node.lo[i], node.hi[i])
        ]
        if not dims:
            raise UnsplittableLeaf(f"param leaf {leaf_id} has no splittable dimension")
        mids = [_midpoint(self.schema.params[d], node.lo[d], node.hi[d]) for d in dims]
        children = [
            self._new_node(leaf_id, lo, hi) for lo, hi in _child_boxes(node.lo, node.hi, dims, mids)
        ]
        node.children = children
        node.split_dims = tuple(dims)
        node.split_mids = tuple(mids)
        pos = self.leaf_ids.index(leaf_id)
        self.leaf_ids[pos : pos + 1] = children
        return children

    def clone(self) -> "ParamTree":
        """Deep copy preserving node ids (so Q rows stay aligned)."""
        other = ParamTree.__new__(ParamTree)
        other.schema = self.schema
        other._next_id = self._next_id
        other.root = self.root
        other.leaf_ids = list(self.leaf_ids)
        other.nodes = {
            nid: TreeNode(n.id, n.parent, n.lo, n.hi, list(n.children), n.split_dims, n.split_mids)
            for nid, n in self.nodes.items()
        }
        return other

    # -- serialization ------------------------------------------------------

    def to_doc(self) -> dict:
        return {
            "schema": self.schema.to_dict(),
            "root": self.root,
            "next_id": self._next_id,
            "nodes": [
                {
                    "id": n.id,
                    "parent": n.parent,
                    "lo": list(n.lo),
                    "hi": list(n.hi),
                    "children": list(n.children),
                    "split_dims": list(n.split_dims) if n.split_dims else None,
                    "split_mids": list(n.split_mids) if n.split_mids else None,
                }
                for n in self.nodes.values()
            ],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ParamTree":
        tree = cls(ActionSchema.from_dict(doc["schema"]))
        tree.nodes = {}
        for nd in doc["nodes"]:
            tree.nodes[nd["id"]] = TreeNode(
                nd["id"],
                nd["parent"],
                tuple(nd["lo"]),
                tuple(nd["hi"]),
                list(nd["children"]),
                tuple(nd["split_dims"]) if nd["split_dims"] else None,
                tuple(nd["split_mids"]) if nd["split_mids"] else None,
            )
        tree.root = doc["root"]
        tree._next_id = doc["next_id"]
        tree.leaf_ids = [n.id for n in tree.nodes.values() if not n.children]
        return tree


@dataclass
class StateNode(TreeNode):
    """State-tree node; leaves carry one ParamTree per action."""

    split_kind: str = "none"  # none | uniform | flexible
    classifier: SvmClassifier | None = None
    class_label: int | None = None  # label under the parent's classifier
    apts: dict[str, ParamTree] | None = None


class StateTree:
    """Partition tree over the state space whose leaves each carry one
    parameter tree per action; jointly defines the current state and action
    abstractions."""

    def __init__(self, state_space: Sequence[VariableSpec], actions: Sequence[ActionSchema]):
        if not state_space:
            raise ValueError("state space must be nonempty")
        if not actions:
            raise ValueError("action list must be nonempty")
        self.state_space = tuple(state_space)
        self.actions = tuple(actions)
        self.nodes: dict[int, StateNode] = {}
        self._next_id = 0
        lo = tuple(v.lo for v in state_space)
        hi = tuple(v.hi for v in state_space)
        self.root = self._new_node(None, lo, hi)
        root_node = self.nodes[self.root]
        root_node.apts = {a.label: ParamTree(a) for a in actions}
        self.leaf_ids: list[int] = [self.root]

    @classmethod
    def universal(
        cls, state_space: Sequence[VariableSpec], actions: Sequence[ActionSchema]
    ) -> "StateTree":
        """The coarsest abstraction: one state leaf covering everything,
        each action's parameter tree a single leaf."""
        return cls(state_space, actions)

    def _new_node(self, parent: int | None, lo, hi) -> int:
        nid = self._next_id
        self._next_id += 1
        self.nodes[nid] = StateNode(nid, parent, lo, hi)
        return nid

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_ids)

    def apt(self, leaf_id: int, label: str) -> ParamTree:
        return self.nodes[leaf_id].apts[label]

    def apt_leaf_total(self) -> int:
        return sum(
            t.n_leaves for lid in self.leaf_ids for t in self.nodes[lid].apts.values()
        )

    def leaf_of(self, state: Sequence[float]) -> int:
        """Unique leaf representing `state`: uniform hops test half-open
        boxes, flexible hops follow the stored classifier's prediction."""
        node = self.nodes[self.root]
        while node.children:
            if node.split_kind == "uniform":
                node = self.nodes[_descend_uniform(node, state)]
            else:
                label = node.classifier.predict_one(state)
                node = self.nodes[node._child_by_label[label]]
        return node.id

    def leaf_contains(self, leaf_id: int, state: Sequence[float]) -> bool:
        """Membership test for one leaf's region, written against the stored
        boxes and classifiers rather than the descent routing; used as the
        partition oracle."""
        node = self.nodes[leaf_id]
        while node.parent is not None:
            parent = self.nodes[node.parent]
            if parent.split_kind == "uniform":
                if not node.box_contains(state):
                    return False
            else:
                if parent.classifier.predict_one(state) != node.class_label:
                    return False
            node = parent
        return node.box_contains(state)

    # -- refinement ---------------------------------------------------------

    def _split_candidates(self, node: StateNode) -> list[int]:
        """Splittable variable indices ordered by descending normalized
        interval width, ties by variable order."""
        cands = []
        for i, spec in enumerate(self.state_space):
            if _splittable(spec, node.lo[i], node.hi[i]):
                cands.append((-(node.hi[i] - node.lo[i]) / spec.width, i))
        cands.sort()
        return [i for _, i in cands]

    def refine_uniform(self, leaf_id: int, variables_to_split: int) -> list[int]:
        """Bisect the `variables_to_split` widest splittable variables of
        the leaf (clamped to what is actually splittable). Children inherit
        copies of the leaf's parameter trees."""
        node = self.nodes[leaf_id]
        if not node.is_leaf:
            raise UnsplittableLeaf(f"node {leaf_id} is not a leaf")
        if variables_to_split < 1:
            raise ValueError("variables_to_split must be >= 1")
        dims = sorted(self._split_candidates(node)[:variables_to_split])
        if not dims:
            raise UnsplittableLeaf(f"state leaf {leaf_id} has no splittable variable")
        mids = [_midpoint(self.state_space[d], node.lo[d], node.hi[d]) for d in dims]
        children = []
        for lo, hi in _child_boxes(node.lo, node.hi, dims, mids):
            cid = self._new_node(leaf_id, lo, hi)
            self.nodes[cid].apts = {lbl: t.clone() for lbl, t in node.apts.items()}
            children.append(cid)
        node.children = children
        node.split_dims = tuple(dims)
        node.split_mids = tuple(mids)
        node.split_kind = "uniform"
        node.apts = None
        pos = self.leaf_ids.index(leaf_id)
        self.leaf_ids[pos : pos + 1] = children
        return children

    def refine_flexible(self, leaf_id: int, model: SvmClassifier) -> list[int]:
        """Split the leaf into one classifier cell per class of `model`.
        The model must have been fit on states inside the leaf and must
        predict at least two distinct classes on its own training set."""
        from .errors import DegenerateModel

        node = self.nodes[leaf_id]
        if not node.is_leaf:
            raise UnsplittableLeaf(f"node {leaf_id} is not a leaf")
        if len(model.classes) < 2:
            raise DegenerateModel("classifier has fewer than two classes")
        if len(model.train_pred_classes) < 2:
            raise DegenerateModel("classifier predicts a single class on its training set")
        children = []
        node._child_by_label = {}
        for label in model.classes:
            cid = self._new_node(leaf_id, node.lo, node.hi)
            child = self.nodes[cid]
            child.class_label = int(label)
            child.apts = {lbl: t.clone() for lbl, t in node.apts.items()}
            children.append(cid)
            node._child_by_label[int(label)] = cid
        node.children = children
        node.split_kind = "flexible"
        node.classifier = model
        node.apts = None
        pos = self.leaf_ids.index(leaf_id)
        self.leaf_ids[pos : pos + 1] = children
        return children

    # -- serialization ------------------------------------------------------

    def to_doc(self) -> dict:
        return {
            "format": "treeq-state-tree",
            "version": DUMP_VERSION,
            "state_space": [v.to_dict() for v in self.state_space],
            "actions": [a.to_dict() for a in self.actions],
            "root": self.root,
            "next_id": self._next_id,
            "nodes": [
                {
                    "id": n.id,
                    "parent": n.parent,
                    "lo": list(n.lo),
                    "hi": list(n.hi),
                    "children": list(n.children),
                    "split_dims": list(n.split_dims) if n.split_dims else None,
                    "split_mids": list(n.split_mids) if n.split_mids else None,
                    "split_kind": n.split_kind,
                    "class_label": n.class_label,
                    "classifier": n.classifier.to_dict() if n.classifier else None,
                    "apts": {lbl: t.to_doc() for lbl, t in n.apts.items()}
                    if n.apts is not None
                    else None,
                }
                for n in self.nodes.values()
            ],
        }

    def to_bytes(self) -> bytes:
        return json.dumps(self.to_doc()).encode("utf-8")

    @classmethod
    def from_doc(cls, doc: dict) -> "StateTree":
        try:
            if doc.get("format") != "treeq-state-tree" or doc.get("version") != DUMP_VERSION:
                raise MalformedTree(
                    f"unsupported tree dump: format={doc.get('format')!r} "
                    f"version={doc.get('version')!r}"
                )
            state_space = tuple(VariableSpec.from_dict(v) for v in doc["state_space"])
            actions = tuple(ActionSchema.from_dict(a) for a in doc["actions"])
            tree = cls(state_space, actions)
            tree.nodes = {}
            for nd in doc["nodes"]:
                node = StateNode(
                    nd["id"],
                    nd["parent"],
                    tuple(nd["lo"]),
                    tuple(nd["hi"]),
                    list(nd["children"]),
                    tuple(nd["split_dims"]) if nd["split_dims"] else None,
                    tuple(nd["split_mids"]) if nd["split_mids"] else None,
                )
                node.split_kind = nd["split_kind"]
                node.class_label = nd["class_label"]
                if nd["classifier"] is not None:
                    node.classifier = SvmClassifier.from_dict(nd["classifier"])
                if nd["apts"] is not None:
                    node.apts = {lbl: ParamTree.from_doc(d) for lbl, d in nd["apts"].items()}
                tree.nodes[nd["id"]] = node
            tree.root = doc["root"]
            tree._next_id = doc["next_id"]
            for node in tree.nodes.values():
                if node.split_kind == "flexible":
                    node._child_by_label = {
                        tree.nodes[c].class_label: c for c in node.children
                    }
            tree.leaf_ids = [n.id for n in tree.nodes.values() if not n.children]
        except MalformedTree:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedTree(f"bad tree dump: {exc}") from exc
        tree._validate()
        return tree

    @classmethod
    def from_bytes(cls, data: bytes) -> "StateTree":
        try:
            doc = json.loads(data.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise MalformedTree(f"undecodable tree dump: {exc}") from exc
        if not isinstance(doc, dict):
            raise MalformedTree("tree dump is not an object")
        return cls.from_doc(doc)

    def _validate(self) -> None:
        if self.root not in self.nodes:
            raise MalformedTree("root node missing")
        seen = set()
        stack = [self.root]
        while stack:
            nid = stack.pop()
            if nid in seen:
                raise MalformedTree("cycle or duplicate child link")
            seen.add(nid)
            node = self.nodes.get(nid)
            if node is None:
                raise MalformedTree(f"dangling child id {nid}")
            for c in node.children:
                if self.nodes.get(c) is None or self.nodes[c].parent != nid:
                    raise MalformedTree(f"bad parent link at node {c}")
                stack.append(c)
            if node.is_leaf:
                if node.apts is None or set(node.apts) != {a.label for a in self.actions}:
                    raise MalformedTree(f"leaf {nid} lacks a parameter tree per action")
            elif node.split_kind == "flexible" and node.classifier is None:
                raise MalformedTree(f"flexible node {nid} lacks its classifier")
        if seen != set(self.nodes):
            raise MalformedTree("unreachable nodes in dump")
