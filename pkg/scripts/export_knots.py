#!/usr/bin/env python3
"""One-time export recipe: build a knots CSV from SnapPy (+ optionally KnotInfo).

This script is documentation of how the full-scale dataset is produced; it
is NOT part of the knotstat package and does not run in the test
environment. It needs a Python with SnapPy installed (pip install snappy),
ideally inside SageMath so spherogram can compute Jones polynomials for
the larger censuses quickly. Expect the 14-crossing run to take hours.

Usage (inside a snappy-capable interpreter):

    python export_knots.py --max-crossings 12 --out knots12.csv

What it writes is exactly the CSV schema knotstat ingests:

    name,crossings,alternating,jones,vol,longitude_length,meridian_length,
    mu_x,mu_y,cusp_volume,chern_simons,khovanov

* jones is "min_exp;c0 c1 ... ck" in the variable q of
  spherogram's jones_polynomial (unknot -> 1 convention).
* the hyperbolic volume comes from the census triangulation
  (high-precision solution; positively oriented solutions only).
* KnotInfo columns (cusp volume, longitude/meridian data, Chern-Simons)
  exist only for <= 12 crossing prime knots. Install the
  `database_knotinfo` package and pass --knotinfo to join them; adapt the
  column names below to the snapshot you downloaded. Chern-Simons values
  may be reported modulo 1/2 or with sign conventions that differ between
  snapshots; knotstat folds everything into [0, 0.5) at ingestion, so any
  representative is fine.
* Khovanov polynomials are not computed here. The reference route is the
  KhoHo package; write each polynomial as semicolon-separated "i,j,c"
  triples into the last column (quote the field, it contains commas).

Census naming: Hoste-Thistlethwaite names K<crossings><a|n><index> encode
the crossing number and alternatingness, e.g. K12n242.
"""

import argparse
import csv
import re
import sys

NAME_RE = re.compile(r"^K?(\d+)([an])")


def jones_field(poly) -> str:
    """Format a sage/spherogram Laurent polynomial as 'min_exp;c0 c1 ...'."""
    exponents = poly.exponents()
    coeffs = poly.coefficients()
    by_exp = dict(zip(exponents, coeffs))
    lo, hi = min(exponents), max(exponents)
    dense = [int(by_exp.get(e, 0)) for e in range(lo, hi + 1)]
    return f"{lo};" + " ".join(str(c) for c in dense)


def export(max_crossings: int, out_path: str, use_knotinfo: bool) -> None:
    import snappy

    knotinfo = {}
    if use_knotinfo:
        # pip install database_knotinfo; numeric columns arrive as strings
        from database_knotinfo import link_list

        for row in link_list():
            knotinfo[row.get("name", "")] = row

    rows = []
    census = snappy.HTLinkExteriors(alternating=None, knots_vs_links="knots")
    for manifold in census:
        name = manifold.name()
        match = NAME_RE.match(name)
        if not match or int(match.group(1)) > max_crossings:
            continue
        try:
            link = manifold.link()
            jones = link.jones_polynomial()
            vol = manifold.volume()
        except (RuntimeError, ValueError) as exc:
            print(f"skipping {name}: {exc}", file=sys.stderr)
            continue
        info = knotinfo.get(name, {})
        rows.append(
            [
                name,
                int(match.group(1)),
                "true" if match.group(2) == "a" else "false",
                jones_field(jones),
                repr(float(vol)),
                info.get("longitude_length", ""),
                info.get("meridian_length", ""),
                info.get("meridian_translation_real", ""),
                info.get("meridian_translation_imag", ""),
                info.get("cusp_volume", ""),
                info.get("chern_simons_invariant", ""),
                "",  # khovanov: fill from a KhoHo export if available
            ]
        )

    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "name",
                "crossings",
                "alternating",
                "jones",
                "vol",
                "longitude_length",
                "meridian_length",
                "mu_x",
                "mu_y",
                "cusp_volume",
                "chern_simons",
                "khovanov",
            ]
        )
        writer.writerows(rows)
    print(f"wrote {len(rows)} knots to {out_path}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-crossings", type=int, default=12)
    parser.add_argument("--out", default="knots.csv")
    parser.add_argument("--knotinfo", action="store_true", help="join KnotInfo columns")
    args = parser.parse_args()
    export(args.max_crossings, args.out, args.knotinfo)
    return 0


if __name__ == "__main__":
    sys.exit(main())
