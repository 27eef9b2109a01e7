"""TPTP outputs compared byte for byte against files under tests/golden.

Run ``python tests/golden_cases.py`` only when an output change is intended;
it rewrites the golden directory.
"""
import shutil
import sys
import tempfile
from pathlib import Path

from fragcheck import ProverConfig, bundled_spec, verify
from fragcheck.prover import emit_axioms

GOLDEN = Path(__file__).parent / "golden"

OBLIGATION_CASES = {
    "decrement_ag": ("decrement", "A G db.x >= 0", 1),
    "purchase_state": ("purchase", "A (db.gold = true || db.status.paid = false)", 0),
}


def render_axioms(name: str) -> str:
    spec = bundled_spec(name)
    return emit_axioms(spec.sig, spec.definitions, header=f"axioms for {spec.name}")


def render_obligations(case: str) -> dict[str, bytes]:
    name, query, depth = OBLIGATION_CASES[case]
    spec = bundled_spec(name)
    with tempfile.TemporaryDirectory() as tmp:
        verify(spec, query, depth, ProverConfig(backend="emit-only", outdir=tmp, spec_name=spec.name))
        return {p.name: p.read_bytes() for p in sorted(Path(tmp).iterdir())}


def regenerate():
    shutil.rmtree(GOLDEN, ignore_errors=True)
    GOLDEN.mkdir()
    for name in ("purchase", "decrement"):
        (GOLDEN / f"{name}_axioms.p").write_text(render_axioms(name), encoding="utf-8")
    for case in OBLIGATION_CASES:
        d = GOLDEN / case
        d.mkdir()
        for fname, data in render_obligations(case).items():
            (d / fname).write_bytes(data)


if __name__ == "__main__":
    regenerate()
    print(f"wrote {sum(1 for p in GOLDEN.rglob('*.p'))} files under {GOLDEN}", file=sys.stderr)
