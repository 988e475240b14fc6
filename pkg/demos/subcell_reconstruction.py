"""Single reconstruction through the command-line interface.

Runs the `reconstruct` subcommand on the reference disk, then reads the
artifacts back: the JSON carries every cell (constants and fitted
half-plane segments) plus error and interface statistics, and the SVG
overlays the fitted segments on the true boundary.  Outputs land in
demo_out/.
"""

import json
import pathlib

from shaperec.cli import main as cli_main

OUT = pathlib.Path("demo_out")


def main():
    OUT.mkdir(exist_ok=True)
    rc = cli_main(
        [
            "reconstruct",
            "--shape", "disk", "--cx", "0.53", "--cy", "0.51", "--r", "0.325",
            "--L", "32", "--method", "licc",
            "--out", str(OUT / "disk_licc.json"),
            "--svg", str(OUT / "disk_licc.svg"),
        ]
    )
    assert rc == 0

    doc = json.loads((OUT / "disk_licc.json").read_text())
    stats = doc["interface_stats"]
    err = doc["error"]
    kinds = {}
    for cell in doc["cells"]:
        kinds[cell["kind"]] = kinds.get(cell["kind"], 0) + 1
    print(f"grid {doc['grid']['L']} x {doc['grid']['L']}, cells by kind: {kinds}")
    print(f"interface cells: {stats['count']}")
    print(
        "segment midpoints inside/outside the true disk: "
        f"{stats['midpoint_inside']}/{stats['midpoint_outside']}, "
        f"mean signed distance {stats['mean_signed_distance']:.2e}"
    )
    print(f"L1 error {err['l1']:.3e} (inner cells {err['l1_inner']:.3e})")
    print(f"artifacts: {OUT / 'disk_licc.json'}, {OUT / 'disk_licc.svg'}")


if __name__ == "__main__":
    main()
