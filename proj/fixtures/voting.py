"""Generates voting.envm: a voter's normative session followed by a corrupt
official, the booth/screen controller, the two no-flip properties and the
turn-taking constraint."""

import sys
from pathlib import Path

from compose import Machine, emit, emit_product

VOTER = ["v.pwd", "v.select", "v.vote", "v.confirm"]
OFFICIAL = ["eo.select", "eo.vote", "eo.confirm"]
ACT = VOTER + ["v.exit", "eo.enter"] + OFFICIAL

# The voter logs in, picks, votes, confirms and leaves; then the official
# walks in and may press anything.
ENV_EDGES = [
    ("s0", "v.pwd", "s1"), ("s1", "v.select", "s2"), ("s2", "v.vote", "s3"),
    ("s3", "v.confirm", "s4"), ("s4", "v.exit", "s5"), ("s5", "eo.enter", "s6"),
    ("s6", "eo.select eo.vote eo.confirm", "s6"),
]

booth = Machine("booth", ACT, "voter", [
    ("voter", " ".join(VOTER), "voter"),
    ("voter", "v.exit", "empty"),
    ("empty", "eo.enter", "official"),
    ("official", " ".join(OFFICIAL), "official"),
])

# The screen does not care who is pressing; it never times out a session.
screen = Machine("screen", VOTER + OFFICIAL, "login", [
    ("login", "v.pwd", "menu"),
    ("menu", "v.select eo.select", "chosen"),
    ("chosen", "v.select eo.select", "chosen"),
    ("chosen", "v.vote eo.vote", "review"),
    ("review", "v.select eo.select", "chosen"),
    ("review", "v.confirm eo.confirm", "cast"),
])

P_ALL = [("ok", a, "err") for a in OFFICIAL]
P_CFM = [("ok", "eo.confirm", "err"), ("ok", "eo.select eo.vote", "ok")]

# The voter follows the screen's order (going back from review to change
# the choice is allowed) and may leave at any point; nobody acts outside the
# booth, and the official only comes in after the voter has left.
P_ENV = [
    ("i0", "v.pwd", "i1"), ("i1", "v.select", "i2"), ("i2", "v.vote", "i3"),
    ("i3", "v.select", "i2"), ("i3", "v.confirm", "i4"),
    ("i0", "v.exit", "out"), ("i1", "v.exit", "out"), ("i2", "v.exit", "out"),
    ("i3", "v.exit", "out"), ("i4", "v.exit", "out"),
    ("out", "eo.enter", "off"),
    ("off", " ".join(OFFICIAL), "off"),
]


def expand(edges):
    return [(s, a, t) for s, acts, t in edges for a in acts.split()]


def main(out):
    parts = ["// Generated by voting.py; edit the generator, not this file.\n"]
    parts.append(emit("environment", "E", "s0", ACT, expand(ENV_EDGES)))
    text, n = emit_product("Machine", [booth, screen], ACT)
    parts.append(text)
    parts.append(emit("property", "Pall", "ok", OFFICIAL, expand(P_ALL)))
    parts.append(emit("property", "Pcfm", "ok", OFFICIAL, expand(P_CFM)))
    parts.append(emit("constraint", "Penv", "i0", ACT, expand(P_ENV), "complete"))
    Path(out).write_text("\n".join(parts))
    print({"Machine": n}, file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "voting.envm")
