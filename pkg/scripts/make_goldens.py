#!/usr/bin/env python3
"""Regenerate the committed golden template renders under tests/goldens/.

Run only after a deliberate template change; the test suite compares renders
byte-for-byte against these files.
"""

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from fcdata.prompt import render_training_example  # noqa: E402

from golden_fixtures import golden_cases  # noqa: E402


def main() -> None:
    out_dir = REPO / "tests" / "goldens"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, (sample, cfg) in golden_cases().items():
        path = out_dir / f"{name}.txt"
        path.write_bytes(render_training_example(sample, cfg).encode("utf-8"))
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
