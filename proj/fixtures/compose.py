"""Tiny helper for writing fixture controllers as products of components.

Each component lists only the actions it cares about; the product synchronises
shared actions and lets the rest interleave, like the tool's own composition.
"""

from collections import deque


class Machine:
    def __init__(self, name, alphabet, init, edges):
        self.name = name
        self.alphabet = list(alphabet)
        self.init = init
        self.edges = {}
        for src, acts, dst in edges:
            for a in acts.split():
                assert a in self.alphabet, (name, a)
                assert (src, a) not in self.edges, (name, src, a)
                self.edges[(src, a)] = dst


def product(name, parts, alphabet):
    init = tuple(p.init for p in parts)
    seen = {init: 0}
    order = [init]
    edges = []
    queue = deque([init])
    while queue:
        s = queue.popleft()
        for a in alphabet:
            nxt = []
            for p, local in zip(parts, s):
                if a not in p.alphabet:
                    nxt.append(local)
                elif (local, a) in p.edges:
                    nxt.append(p.edges[(local, a)])
                else:
                    break
            else:
                t = tuple(nxt)
                if t not in seen:
                    seen[t] = len(order)
                    order.append(t)
                    queue.append(t)
                edges.append((s, a, t))
    label = lambda s: "_".join(s)
    return name, [label(s) for s in order], [(label(s), a, label(t)) for s, a, t in edges]


def emit(kind, name, init, alphabet, edges, modifier=""):
    lines = [f"{kind} {name}{' ' + modifier if modifier else ''} {{", f"  init {init};"]
    lines.append("  alphabet " + ", ".join(alphabet) + ";")
    for s, a, t in edges:
        lines.append(f"  {s} -{a}-> {t};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_product(name, parts, alphabet):
    name, states, edges = product(name, parts, alphabet)
    return emit("controller", name, states[0], alphabet, edges), len(states)
