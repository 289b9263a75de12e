#!/usr/bin/env python3
"""Regenerate the bundled scenario JSON files from the template builders.

Run from the repository root after editing the templates in
grit.evaluation; the bundled files must stay byte-identical to what
build_template produces.
"""

import json
from pathlib import Path

from grit.evaluation import build_template, template_names
from grit.scenario import scenario_to_dict

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "grit" / "data"


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name in template_names():
        scenario = build_template(name)
        path = OUT_DIR / f"{name}.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(scenario_to_dict(scenario), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
