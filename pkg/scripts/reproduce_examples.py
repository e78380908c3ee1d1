# scripts/reproduce_examples.py
import os
import sys
import tempfile

# --- Ensure src folder is on sys.path ---
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "../src")))

from classifier import classify_corollary, classify_theorem
from golden import REFERENCE_CASES
from hausdorff_density import negativity_witness, positivity_certificate, weight_spec_of
from moment_core import ModuleParams
from numeric import format_scalar
from output.emitters import get_emitter
from scan import RunConfig, parse_grid, run_scan
from witness_search import search_witness


def run():
    # ---- Verdicts and roots for the reference pairs ----
    print("\n--- Reference pairs ---")
    for label, s1, s2 in REFERENCE_CASES:
        params = ModuleParams(s1, s2)
        verdict = classify_corollary(params)
        theorem = classify_theorem(verdict.roots)
        roots = ", ".join(format_scalar(r, 12) for r in verdict.roots.roots)
        print(f"({label}): subnormal={verdict.subnormal} [{verdict.rule_fired}] "
              f"roots {roots} agree={theorem.same_decision(verdict)}")

    # ---- Witnesses ----
    print("\n--- Witnesses ---")
    for s1, s2 in ((15, 10), (6, 6), (8, 12), (3, 3)):
        search = search_witness(ModuleParams(s1, s2), 100, 10)
        found = [w.summary() for w in (search.difference, search.density) if w is not None]
        print(f"({s1},{s2}):", "; ".join(found) or "none within caps")

    # ---- Densities ----
    print("\n--- Densities ---")
    for s1, s2 in ((1, 1), (2, 2), (3, 3)):
        spec = weight_spec_of(ModuleParams(s1, s2))
        report = positivity_certificate(spec)
        witness = negativity_witness(spec) if spec.theta is not None else None
        print(f"({s1},{s2}): {spec.case_tag.value}, min w = {format_scalar(report.min_value, 8)}",
              f"witness {witness.summary()}" if witness else "")

    # ---- Region picture of a small window ----
    s1_axis, s2_axis = parse_grid("1/4:16:1/4")
    records = run_scan(RunConfig(s1_axis=s1_axis, s2_axis=s2_axis, format="svg"))
    out = os.path.join(tempfile.mkdtemp(), "region.svg")
    get_emitter("svg").write(records, out)
    print("\n--- Region scan ---")
    print(f"{sum(r.subnormal for r in records)}/{len(records)} subnormal; picture at {out}")


if __name__ == "__main__":
    run()
