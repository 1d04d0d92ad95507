"""Run the command-line workflow on a sample config and list the outputs."""
import sys
import tempfile
from pathlib import Path

from towerlab.cli import main

config = Path(__file__).parent / "configs" / "torus_tower.json"
with tempfile.TemporaryDirectory() as out:
    code = main(["run", "--config", str(config), "--out", out])
    print("exit code", code)
    for path in sorted(Path(out).iterdir()):
        print(f"  {path.name:16s} {path.stat().st_size:7d} bytes")
    sys.exit(code)
