"""Generates therac.envm: the normative workflow, three machine variants,
the flattener property and the single-shot constraint."""

import sys
from pathlib import Path

from compose import Machine, emit, emit_product

ACT = ["x", "e", "up", "enter", "rdy", "b", "flat", "xfire", "efire"]

# Terminal. The original software only waits for the turntable on the first
# enter; after an edit (up, then a new mode) enter goes straight to ready.
def terminal(fixed):
    second_enter = "wait" if fixed else "ready"
    return Machine("term", ["x", "e", "up", "enter", "rdy", "b"], "edit", [
        ("edit", "x e", "sel"),
        ("sel", "x e", "sel"),
        ("sel", "enter", "wait"),
        ("wait", "rdy", "ready"),
        ("ready", "b", "edit"),
        ("ready", "up", "edit2"),
        ("edit2", "x e", "sel2"),
        ("sel2", "x e", "sel2"),
        ("sel2", "enter", second_enter),
    ])

# Beam mode follows the keyboard immediately.
beam25 = Machine("beam", ["x", "e", "b", "xfire", "efire"], "none", [
    ("none", "x", "xm"), ("none", "e", "em"),
    ("xm", "x", "xm"), ("xm", "e", "em"),
    ("em", "x", "xm"), ("em", "e", "em"),
    ("xm", "b", "firex"), ("em", "b", "firee"),
    ("firex", "xfire", "xm"), ("firee", "efire", "em"),
])

# Interlocked beam: switching to X-ray mode completes only once the
# flattener is in place, and the fire key is ignored meanwhile.
beam20 = Machine("beam", ["x", "e", "b", "flat", "xfire", "efire"], "none", [
    ("none", "x", "sw"), ("none", "e", "em"),
    ("sw", "x", "sw"), ("sw", "e", "em"), ("sw", "flat", "xm"),
    ("xm", "x", "xm"), ("xm", "e", "em"), ("xm", "flat", "xm"),
    ("em", "x", "sw"), ("em", "e", "em"), ("em", "flat", "em"),
    ("xm", "b", "firex"), ("em", "b", "firee"),
    ("firex", "xfire", "xm"), ("firee", "efire", "em"),
    ("firex", "flat", "firex"), ("firee", "flat", "firee"),
])

# Turntable: selecting electron mode swings the spreader in at once; the
# flattener takes time and announces itself with flat. rdy is only offered
# once the table sits where the selected mode needs it.
turntable = Machine("turn", ["x", "e", "flat", "rdy"], "s", [
    ("s", "e", "s"), ("s", "x", "mf"), ("s", "rdy", "s"),
    ("mf", "x", "mf"), ("mf", "e", "s"), ("mf", "flat", "f"),
    ("f", "x", "f"), ("f", "e", "s"), ("f", "rdy", "f"),
])

ENV_EDGES = [
    ("idle", "x", "sel"), ("idle", "e", "sel"),
    ("sel", "flat", "sel"), ("sel", "enter", "wait"),
    ("wait", "flat", "wait"), ("wait", "rdy", "wait"), ("wait", "b", "fired"),
    ("fired", "xfire", "idle"), ("fired", "efire", "idle"),
]

P_XFLAT = [
    ("s", "e", "s"), ("s", "flat", "f"), ("s", "xfire", "err"),
    ("f", "e", "s"), ("f", "flat", "f"), ("f", "xfire", "f"),
]

# Operator protocol: type one mode key, enter, optionally see beam ready,
# then either fire or go back up and choose again.
P_ENV = [
    ("k0", "x", "k1"), ("k0", "e", "k1"), ("k1", "enter", "k2"),
    ("k2", "rdy", "k3"), ("k3", "rdy", "k3"),
    ("k2", "up", "k0"), ("k3", "up", "k0"),
    ("k2", "b", "k0"), ("k3", "b", "k0"),
]
KEYS = ["x", "e", "up", "enter", "rdy", "b"]


def main(out):
    parts = ["// Generated by therac.py; edit the generator, not this file.\n"]
    parts.append(emit("environment", "E", "idle", ACT, ENV_EDGES))
    sizes = {}
    for name, comps in [
        ("T25", [terminal(False), beam25, turntable]),
        ("T25fix", [terminal(True), beam25, turntable]),
        ("T20", [terminal(False), beam20, turntable]),
    ]:
        text, n = emit_product(name, comps, ACT)
        parts.append(text)
        sizes[name] = n
    parts.append(emit("property", "Pxflat", "s", ["e", "flat", "xfire"], P_XFLAT))
    parts.append(emit("constraint", "Penv", "k0", KEYS, P_ENV, "complete"))
    Path(out).write_text("\n".join(parts))
    print(sizes, file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "therac.envm")
