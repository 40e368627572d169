"""
Smoke script: run every verification suite on the acceptance domains
"""
import sys

from config import load_config
from errors import PeriodLabError
from hodge_core import build_domain_spec
from verification import SUITES, DomainLab, run_suite

DOMAINS = [
    ("unit disc", 1, [1, 1]),
    ("Siegel space of genus 2", 1, [2, 2]),
    ("quadric type", 2, [1, 3, 1]),
    ("non-classical", 2, [2, 1, 2]),
]

# kept small so the whole script finishes in a few minutes
COUNTS = {"lie": 20, "hc": 100, "diagram": 20, "bound": 2, "affine": 20}


def main(seed: int = 0) -> bool:
    """
    Run each suite on each domain and print a tally
    """
    print("=" * 60)
    print("🧪 Period-domain lab smoke test")
    print("=" * 60)

    config = load_config()
    failures = 0
    for i, (name, weight, hodge) in enumerate(DOMAINS, start=1):
        print(f"\n{i}️⃣ {name} (weight {weight}, h = {hodge})")
        lab = DomainLab(build_domain_spec(weight, hodge), config, seed)
        for suite in SUITES:
            try:
                report = run_suite(lab, suite, seed, COUNTS.get(suite))
            except PeriodLabError as e:
                print(f"   ❌ {suite}: {e}")
                failures += 1
                continue
            if report.passed:
                print(f"   ✅ {suite}")
            else:
                bad = [c["name"] for c in report.checks if not c["passed"]]
                print(f"   ❌ {suite}: {', '.join(bad)}")
                failures += 1

    print("\n" + "=" * 60)
    if failures:
        print(f"❌ {failures} suite(s) failed")
    else:
        print("✅ System test completed!")
    print("=" * 60)
    print("\n🚀 Full runs: python pdlab.py report --weight 2 --hodge 1,3,1")
    return failures == 0


if __name__ == "__main__":
    sys.exit(0 if main() else 1)
