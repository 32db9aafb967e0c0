"""Generates oyster.envm: a card holder tapping in and out with one card,
entry/exit gates with fare calculation, the incomplete-journey property and
the card/gate correctness constraint."""

import sys
from pathlib import Path

from compose import Machine, emit, emit_product

CARDS = ["oy", "cc"]
ACT = [f"{c}.{d}" for d in ("in", "out") for c in CARDS] + [f"fare.{c}" for c in CARDS]

# Tap in, tap out with the same card, then the fare is settled.
ENV_EDGES = [
    ("idle", "oy.in", "oyster"), ("oyster", "oy.out", "settle"),
    ("idle", "cc.in", "credit"), ("credit", "cc.out", "settle"),
    ("settle", "fare.oy", "idle"), ("settle", "fare.cc", "idle"),
]

# Entry gate remembers which card opened it.
entry = Machine("entry", ACT, "closed", [
    ("closed", "oy.in", "by_oy"), ("closed", "cc.in", "by_cc"),
    ("by_oy", "oy.out cc.out", "closed"), ("by_cc", "oy.out cc.out", "closed"),
])

# Exit gate opens for any card and bills whichever card touched it, with a
# maximum fare when the journey was never opened on that card.
def exit_gate():
    edges = [("ready", "oy.in cc.in", "ready")]
    for c in CARDS:
        edges.append(("ready", f"{c}.out", f"bill_{c}"))
        edges.append((f"bill_{c}", f"fare.{c}", "ready"))
    return Machine("exit", ACT, "ready", edges)

# Which card the journey was opened with, for the maximum-fare decision.
journey = Machine("journey", ACT, "none", [
    ("none", "oy.in", "oy"), ("none", "cc.in", "cc"),
    ("oy", "oy.out", "same"), ("oy", "cc.out", "other"),
    ("cc", "cc.out", "same"), ("cc", "oy.out", "other"),
    ("same", "fare.oy fare.cc", "none"), ("other", "fare.oy fare.cc", "none"),
])

# Incomplete journey: tapping out with a different card than the one tapped in.
P_JOURNEY = [
    ("none", "oy.in", "oy"), ("none", "cc.in", "cc"),
    ("none", "oy.out cc.out", "none"),
    ("oy", "oy.in cc.in", "oy"), ("oy", "oy.out", "none"), ("oy", "cc.out", "err"),
    ("cc", "oy.in cc.in", "cc"), ("cc", "cc.out", "none"), ("cc", "oy.out", "err"),
]

# Cards report taps truthfully (each tap in is matched by one tap out) and
# the gates settle exactly one fare per completed tap out.
P_ENV = [
    ("travel0", "oy.in cc.in", "travel1"),
    ("travel1", "oy.out cc.out", "billing"),
    ("billing", "fare.oy fare.cc", "travel0"),
]


def expand(edges):
    return [(s, a, t) for s, acts, t in edges for a in acts.split()]


def main(out):
    parts = ["// Generated by oyster.py; edit the generator, not this file.\n"]
    parts.append(emit("environment", "E", "idle", ACT, expand(ENV_EDGES)))
    text, n = emit_product("Gates", [entry, exit_gate(), journey], ACT)
    parts.append(text)
    taps = ACT[:4]
    parts.append(emit("property", "Pjourney", "none", taps, expand(P_JOURNEY)))
    parts.append(emit("constraint", "Penv", "travel0", ACT, expand(P_ENV), "complete"))
    Path(out).write_text("\n".join(parts))
    print({"Gates": n}, file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "oyster.envm")
