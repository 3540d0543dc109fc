"""Oracle outputs frozen from ``dfsqkd.oracle`` (exhaustive Born-branch sums over the 8-dim register).

``test_oracle.py`` recomputes every entry; Monte Carlo tests compare against these.
"""

# forward-leg attack: P(check round inconsistent) per Bob check basis and averaged
CHECK_RATES = {
    ("dephasing", "ir-z"): {"Z": 0.0, "X": 0.5, "average": 0.25},
    ("dephasing", "ir-x"): {"Z": 0.75, "X": 0.0, "average": 0.375},
    ("dephasing", "ir-y"): {"Z": 0.75, "X": 0.5, "average": 0.625},
    ("dephasing", "ir-rand"): {"Z": 5 / 9, "X": 4 / 9, "average": 0.5},
    ("dephasing", "ir-logical"): {"Z": 0.0, "X": 0.5, "average": 0.25},
    ("rotation", "ir-z"): {"Z": 0.0, "Y": 0.75, "average": 0.375},
    ("rotation", "ir-x"): {"Z": 0.5, "Y": 0.75, "average": 0.625},
    ("rotation", "ir-y"): {"Z": 0.5, "Y": 0.0, "average": 0.25},
    ("rotation", "ir-rand"): {"Z": 4 / 9, "Y": 5 / 9, "average": 0.5},
    ("rotation", "ir-logical"): {"Z": 0.0, "Y": 0.5, "average": 0.25},
}

# backward-leg attack, uniform codes: P(decoded dibit wrong), expected raw-bit mismatch
MESSAGE_RATES = {
    ("dephasing", "ir-z"): {"dibit": 0.5, "bit": 0.25},
    ("dephasing", "ir-x"): {"dibit": 0.5, "bit": 0.25},
    ("dephasing", "ir-y"): {"dibit": 0.75, "bit": 0.5},
    ("dephasing", "ir-rand"): {"dibit": 11 / 18, "bit": 7 / 18},
    ("dephasing", "ir-logical"): {"dibit": 0.5, "bit": 0.25},
    ("rotation", "ir-z"): {"dibit": 0.75, "bit": 0.5},
    ("rotation", "ir-x"): {"dibit": 0.5, "bit": 0.25},
    ("rotation", "ir-y"): {"dibit": 0.5, "bit": 0.5},
    ("rotation", "ir-rand"): {"dibit": 11 / 18, "bit": 4 / 9},
    ("rotation", "ir-logical"): {"dibit": 0.5, "bit": 0.25},
}

STRATEGIES = ("ir-z", "ir-x", "ir-y", "ir-rand", "ir-logical")


def oracle_args(name):
    """CLI strategy name -> (kind, basis) as the oracle spells them."""
    if name == "ir-logical":
        return "logical", None
    return "physical", name.split("-")[1]
