#!/usr/bin/env python3
"""Regenerate the shipped demo and released datasets under data/.

Both are deterministic; rerunning must reproduce the checked-in files
byte for byte. The released build validates its statistical bands.
"""

import json
from pathlib import Path

from scicert.datagen import write_demo, write_released

ROOT = Path(__file__).resolve().parent.parent


def main():
    released = write_released(ROOT / "data" / "released")
    print("released:", json.dumps(released, indent=2, sort_keys=True))
    demo = write_demo(ROOT / "data" / "demo")
    print("demo:", json.dumps(demo, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
