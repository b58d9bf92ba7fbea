"""Recorded forests and their JSON / DOT exports.

Each tree has a root node; generator trees also carry the generator's literal
and store. Edge labels are `clause(k)` for program-clause resolution,
`constraint` for a constraint step, and `answer(xj)` for the consumption of the
j-th answer of the generator lettered x (a, b, c, ... in creation order).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional


def generator_letter(gid: int) -> str:
    letters = ""
    n = gid
    while True:
        letters = chr(ord("a") + n % 26) + letters
        n = n // 26 - 1
        if n < 0:
            return letters


@dataclass
class NodeRecord:
    id: int
    tree: int
    resolvent: object  # engine resolvent (linked pairs) or list of strings
    store: object  # ConstraintStore or its rendering
    children: list = field(default_factory=list)
    mark: Optional[str] = None  # answer / fail / suspended / discarded

    def resolvent_text(self) -> list[str]:
        if isinstance(self.resolvent, list):
            return self.resolvent
        out, r = [], self.resolvent
        while r is not None:
            item, r = r
            out.append(_item_text(item))
        return out

    def store_text(self) -> str:
        return self.store if isinstance(self.store, str) else self.store.render()


def _item_text(item) -> str:
    from .lang import Constraint, format_item

    return format_item(item) if isinstance(item, Constraint) else str(item)


@dataclass
class TreeRecord:
    id: int
    root: Optional[int] = None
    generator: Optional[dict] = None  # {"literal": ..., "store": ...}


class ForestRecord:
    def __init__(self):
        self.trees: dict[int, TreeRecord] = {}
        self.nodes: list[NodeRecord] = []

    def new_tree(self, generator: Optional[dict] = None) -> int:
        tid = len(self.trees)
        self.trees[tid] = TreeRecord(tid, None, generator)
        return tid

    def add_node(self, tree: int, parent: Optional[int], label: str, resolvent, store) -> int:
        nid = len(self.nodes)
        self.nodes.append(NodeRecord(nid, tree, resolvent, store))
        if parent is None:
            self.trees[tree].root = nid
        else:
            self.nodes[parent].children.append((label, nid))
        return nid

    def mark(self, nid: int, mark: str):
        self.nodes[nid].mark = mark

    # -- export
    def to_json(self) -> dict:
        by_tree: dict[int, list] = {t: [] for t in self.trees}
        for n in self.nodes:
            by_tree[n.tree].append(
                {
                    "id": n.id,
                    "resolvent": n.resolvent_text(),
                    "store": n.store_text(),
                    "children": [{"edge": lab, "node": c} for lab, c in n.children],
                    "mark": n.mark,
                }
            )
        trees = []
        for tid, t in self.trees.items():
            gen = None
            if t.generator is not None:
                gen = {k: (v if isinstance(v, str) else v.render()) for k, v in t.generator.items()}
            trees.append({"root_id": t.root, "generator": gen, "nodes": by_tree[tid]})
        return {"trees": trees}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data: dict) -> "ForestRecord":
        f = cls()
        for tree in data["trees"]:
            tid = f.new_tree(tree["generator"])
            f.trees[tid].root = tree["root_id"]
            for n in tree["nodes"]:
                rec = NodeRecord(
                    n["id"], tid, list(n["resolvent"]), n["store"],
                    [(c["edge"], c["node"]) for c in n["children"]], n.get("mark"),
                )
                f.nodes.append(rec)
        f.nodes.sort(key=lambda r: r.id)
        return f

    def to_dot(self) -> str:
        lines = ["digraph forest {", "  node [shape=box, fontname=monospace];"]
        for tid, t in self.trees.items():
            lines.append(f"  subgraph cluster_{tid} {{")
            if t.generator is not None:
                g = t.generator
                store = g["store"] if isinstance(g["store"], str) else g["store"].render()
                label = f"{g['literal']} | {store}"
            else:
                label = "query"
            lines.append(f"    label={json.dumps(label)};")
            for n in self.nodes:
                if n.tree != tid:
                    continue
                res = ", ".join(n.resolvent_text()) or "[]"
                text = f"s{n.id}: <{res} ; {n.store_text()}>"
                if n.mark:
                    text += f" ({n.mark})"
                lines.append(f"    n{n.id} [label={json.dumps(text)}];")
            lines.append("  }")
        for n in self.nodes:
            for lab, c in n.children:
                edge = lab[len("answer("):-1] if lab.startswith("answer(") else lab
                lines.append(f"  n{n.id} -> n{c} [label={json.dumps('(' + edge + ')')}];")
        lines.append("}")
        return "\n".join(lines) + "\n"
