"""Sweep stimulus contrast and object speed to map where the detector confirms a collision.

The grouping threshold only admits cells whose summed excitation is large,
so detection depends strongly on luminance contrast. This prints one table
per stimulus kind: rows are contrasts, columns are speeds (or end sizes for
looming), entries are the first confirmation frame or '-'.

Usage: python scripts/contrast_sweep.py
"""

from lgmd.core import Params
from lgmd.pipeline import run_sequence
from lgmd.stimulus import Kind, default_spec, generate

CONTRASTS = [(110, 150), (66, 190), (30, 220), (10, 245)]


def first_confirm(spec, params):
    res = run_sequence(generate(spec), params)
    return next((i for i, r in enumerate(res) if r.c_lgmd), None)


def table(kind, axis_name, values, make):
    params = Params()
    print(f"\n{kind.value}: first confirmation frame by contrast (rows) and {axis_name} (columns)")
    print(" " * 12 + "".join(f"{v:>8}" for v in values))
    for dark, light in CONTRASTS:
        cells = []
        for v in values:
            f = first_confirm(make(v, dark, light), params)
            cells.append("-" if f is None else str(f))
        print(f"{dark:>4}/{light:<6}  " + "".join(f"{c:>8}" for c in cells))


def main():
    table(Kind.LOOMING, "start size", [0.1, 0.2, 0.3],
          lambda v, d, l: default_spec(Kind.LOOMING, start_size=v, object_luminance=d, background_luminance=l))
    table(Kind.TRANSLATE, "speed px/frame", [1, 2, 3, 4],
          lambda v, d, l: default_spec(Kind.TRANSLATE, speed=v, object_luminance=d, background_luminance=l))
    table(Kind.GRATING, "drift px/frame", [1, 2, 3, 4],
          lambda v, d, l: default_spec(Kind.GRATING, drift=v, object_luminance=d, background_luminance=l))


if __name__ == "__main__":
    main()
