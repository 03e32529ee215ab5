"""Fixed marker and colour catalogue, keyed by method acronym.

One entry per benchmark method so every figure renders a method the
same way regardless of which subset the CSV contains.
"""

# method -> (marker, colour)
STYLE = {
    "NONE": ("x", "tab:gray"),
    "F-GP": ("s", "tab:blue"),
    "A-GP": ("D", "tab:cyan"),
    "B-GP-i": ("^", "tab:orange"),
    "W-Ag-L2": ("v", "tab:green"),
    "W-Ag-GRAD": ("<", "tab:olive"),
    "S-Ag": ("o", "black"),
}

# catalogue order doubles as legend / anchor-fallback order
METHOD_ORDER = tuple(STYLE)


def style_for(method):
    if method not in STYLE:
        raise KeyError(f"method {method!r} is not in the style catalogue")
    return STYLE[method]
