"""Drive the command-line tool end to end in a scratch directory.

Equivalent shell session:

    thermrom simulate --config configs/silver_fr4.json --duration 120 --dx 0.0005 --sample-dt 0.5 --out oracle.csv
    thermrom characterize --config configs/silver_fr4.json --tm 20 --dx 0.0005 --out model.json
    thermrom predict --model model.json --schedule configs/silver_fr4.json --duration 120 --sample-dt 0.5 --out rom.csv
    thermrom compare oracle.csv rom.csv --out report.json
"""

import tempfile
from pathlib import Path

from thermrom.cli import main

config = str(Path(__file__).parent / "configs" / "silver_fr4.json")

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp)
    steps = [
        ["simulate", "--config", config, "--duration", "120", "--dx", "0.0005",
         "--sample-dt", "0.5", "--out", str(out / "oracle.csv")],
        ["characterize", "--config", config, "--tm", "20", "--dx", "0.0005", "--out", str(out / "model.json")],
        ["predict", "--model", str(out / "model.json"), "--schedule", config, "--duration", "120",
         "--sample-dt", "0.5", "--out", str(out / "rom.csv")],
        ["compare", str(out / "oracle.csv"), str(out / "rom.csv"), "--out", str(out / "report.json")],
    ]
    for argv in steps:
        print("$ thermrom", argv[0], flush=True)
        rc = main(argv)
        if rc:
            raise SystemExit(rc)
    print("\nmodel.json:", (out / "model.json").read_text())
    print("files:", sorted(p.name for p in out.iterdir()))
