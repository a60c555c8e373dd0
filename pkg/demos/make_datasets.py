"""
Regenerate the packaged synthetic datasets
==========================================

The three trace files under ``src/fracsgs/data`` are synthetic stand-ins
for digitized field maps. This script rebuilds them from the seeded
generators in :mod:`fracsgs.datasets`, so the files can always be traced
back to code.
"""

from pathlib import Path

from fracsgs import datasets, io

out = Path(__file__).resolve().parents[1] / "src" / "fracsgs" / "data"
out.mkdir(exist_ok=True)
NOTE = "SYNTHETIC data generated by fracsgs.datasets.{}(); not a field survey."

# Example 1: one family at 70 degrees, observed on the right half only.
traces, domain = datasets.example1()
io.save_traces(traces, out / "example1_traces.txt", units="m", domain=domain,
               comment=NOTE.format("example1"))

# Example 2: fault map with mean segment length 2289.27 m.
traces, domain = datasets.example2()
io.save_traces(traces, out / "example2_traces.txt", units="m", domain=domain,
               comment=NOTE.format("example2"))

# Example 3: four-mode outcrop map in feet.
traces, domain = datasets.example3()
io.save_traces(traces, out / "example3_traces.txt", units="ft", domain=domain,
               comment=NOTE.format("example3"))

for p in sorted(out.glob("*_traces.txt")):
    print(p.name, len(io.load_traces(p)), "traces")
