"""Rebuild the reference scene, calibration and demonstration corpus.

The committed files under ``fixtures/reference`` come from this script; the
test suite checks that they still match byte for byte.

    python3 demos/regenerate_fixture.py [out_dir]
"""

import json
import sys
from pathlib import Path

from dualdisasm.fixtures import write_reference_fixture

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "fixtures" / "reference"
manifest = write_reference_fixture(out)
print(json.dumps(manifest, indent=2))
