"""Generates pump.envm: the nurse's three-step workflow, the composed pump
controller, the no-dosing-after-power-failure property and the interface
constraint."""

import sys
from pathlib import Path

from compose import Machine, emit, emit_product

SETTINGS = ["set.vol", "set.min", "set.max"]
USER = ["plug", "unplug", "on", "off", "prog"] + SETTINGS + ["confirm", "start", "stop", "request"]
FAULTS = ["occlude", "alarm", "silence", "clear", "drain", "charge"]
ACT = USER + ["dose", "pfail"] + FAULTS

# 1) plug in and switch on, 2) program and treat (any number of times),
# 3) switch off and unplug.
ENV_EDGES = [
    ("unplugged", "plug", "plugged"), ("plugged", "on", "menu"),
    ("menu", "prog", "vol"), ("vol", "set.vol", "lo"), ("lo", "set.min", "hi"),
    ("hi", "set.max", "review"), ("review", "confirm", "armed"),
    ("armed", "start", "infusing"),
    ("infusing", "request", "bolus"), ("bolus", "dose", "infusing"),
    ("infusing", "stop", "menu"),
    ("menu", "off", "down"), ("down", "unplug", "unplugged"),
]
# A battery can run flat at any time; it only matters once the pump is
# running on battery.
ENV_STATES = sorted({s for s, _, _ in ENV_EDGES} | {t for _, _, t in ENV_EDGES})
ENV_EDGES += [(s, "pfail", s) for s in ENV_STATES]

# Mains and battery. When the battery dies the monitor is gone for good
# (the pump needs servicing), but a running infusion keeps delivering
# whatever the patient requests.
power = Machine("power", ["plug", "unplug", "on", "off", "pfail", "prog"] + SETTINGS
                + ["confirm", "start", "stop", "request", "dose"], "u_off", [
    ("u_off", "plug", "p_off"), ("p_off", "unplug", "u_off"),
    ("p_off", "on", "p_on"), ("p_on", "off", "p_off"),
    ("p_on", "unplug", "b_on"), ("b_on", "plug", "p_on"),
    ("b_on", "off", "u_off"), ("b_on", "pfail", "dead"),
    ("dead", "request dose", "dead"),
    ("p_on", " ".join(["prog"] + SETTINGS + ["confirm", "start", "stop", "request", "dose"]), "p_on"),
    ("b_on", " ".join(["prog"] + SETTINGS + ["confirm", "start", "stop", "request", "dose"]), "b_on"),
])

# Screen flow. Settings may be revised after confirming, and the pump may
# be switched off once programming is complete. A power failure blanks the
# screen, except that a running infusion keeps delivering on request with
# nothing left to watch it.
PAGES = ["menu", "vol", "lo", "hi", "review", "armed"]
screen = Machine("screen", ["on", "off", "prog"] + SETTINGS
                 + ["confirm", "start", "stop", "request", "dose", "pfail", "plug"], "dark", [
    ("dark", "on", "menu"), ("dark", "plug", "dark"),
    ("menu", "prog", "vol"), ("menu", "off", "dark"),
    ("vol", "set.vol", "lo"), ("lo", "set.min", "hi"), ("hi", "set.max", "review"),
    ("review", "confirm", "armed"), ("armed", "set.vol", "lo"),
    ("review", "off", "dark"), ("armed", "off", "dark"),
    ("armed", "start", "infusing"),
    ("infusing", "request", "bolus"), ("bolus", "dose", "infusing"),
    ("infusing", "stop", "menu"),
    ("infusing", "pfail", "runaway"), ("bolus", "pfail", "runaway_b"),
    ("runaway", "request", "runaway_b"), ("runaway_b", "dose", "runaway"),
    ("infusing", "plug", "infusing"), ("bolus", "plug", "bolus"),
] + [(p, "pfail", "dark") for p in PAGES] + [(p, "plug", p) for p in PAGES])


# Occlusion alarm and battery gauge. Sensor events are outside what the
# nurse does, so the constraint below rules them out, but the pump still has
# to handle them.
alarm = Machine("alarm", ["occlude", "alarm", "silence", "clear", "start", "stop", "dose"], "quiet", [
    ("quiet", "start stop dose", "quiet"), ("quiet", "occlude", "blocked"),
    ("blocked", "alarm", "ringing"), ("blocked", "stop", "quiet"),
    ("ringing", "silence", "muted"), ("ringing", "stop", "quiet"),
    ("muted", "alarm", "ringing"), ("muted", "clear", "quiet"), ("muted", "stop", "quiet"),
])

gauge = Machine("gauge", ["drain", "charge", "pfail"], "full", [
    ("full", "drain", "half"), ("half", "drain", "low"),
    ("half", "charge", "full"), ("low", "charge", "half"),
    ("full", "pfail", "full"), ("half", "pfail", "half"), ("low", "pfail", "low"),
])


P_PFAIL = [
    ("ok", "pfail", "failed"), ("ok", "dose", "ok"),
    ("failed", "dose", "err"), ("failed", "pfail", "failed"),
]

# What the interface lets a nurse do: the workflow order, revising settings
# before starting, switching off once programming is complete, and pulling
# or replugging the mains cable whenever the pump is on. A dose only follows
# a request, and the occlusion sensor never fires.
def interface():
    edges = [
        ("u", "plug", "p"), ("p", "unplug", "u"), ("p", "on", "m"),
        ("m", "prog", "v"), ("m", "off", "d"),
        ("v", "set.vol", "l"), ("l", "set.min", "h"), ("h", "set.max", "r"),
        ("r", "confirm", "a"), ("a", "start", "i"), ("a", "set.vol", "l"),
        ("r", "off", "d"), ("a", "off", "d"),
        ("i", "request", "b"), ("b", "dose", "i"), ("i", "stop", "m"),
        ("d", "unplug", "u"),
    ]
    for s in ["m", "v", "l", "h", "r", "a", "i", "b"]:
        edges.append((s, "plug unplug", s))
    return edges


P_ENV = interface()
GUARDED = USER + ["dose"] + FAULTS


def expand(edges):
    out = []
    for s, acts, t in edges:
        for a in acts.split():
            out.append((s, a, t))
    return out


def main(out):
    parts = ["// Generated by pump.py; edit the generator, not this file.\n"]
    parts.append(emit("environment", "E", "unplugged", ACT, expand(ENV_EDGES)))
    text, n = emit_product("Pump", [power, screen, alarm, gauge], ACT)
    parts.append(text)
    parts.append(emit("property", "Ppfail", "ok", ["pfail", "dose"], expand(P_PFAIL)))
    parts.append(emit("constraint", "Penv", "u", GUARDED, expand(P_ENV), "complete"))
    Path(out).write_text("\n".join(parts))
    print({"Pump": n}, file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "pump.envm")
