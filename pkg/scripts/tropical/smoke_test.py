#!/usr/bin/env python3
"""
Smoke test for the tropical period engine.

Loads every bundled fixture, checks that it validates, computes its
homology and the periods of its interior cycles, and compares the periods
with the expected closed forms.

Example:
    python scripts/tropical/smoke_test.py
    python scripts/tropical/smoke_test.py --fixtures-dir ./templates/tropical --verbose
"""

import argparse
import logging
import sys
from pathlib import Path

# Add parent to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

FIXTURES_DIR = Path(__file__).resolve().parents[2] / "templates" / "tropical"

# (fixture, cycle) -> (constant, t-exponent)
EXPECTED_PERIODS = {
    **{(f"tate_k{k}", "beta"): (1, k) for k in range(1, 6)},
    ("circle", "loop"): (3, 2),
    ("torus", "x_loop"): (2, 2),
    ("torus", "x_transverse"): (3, 0),
    ("torus", "y_transverse"): (1, 0),
    ("focus_focus", "around"): (1, 0),
}

# fixture -> {degree: free rank} of H_i(B, ∂B; i_*Λ)
EXPECTED_RANKS = {
    **{f"tate_k{k}": {0: 1, 1: 1} for k in range(1, 6)},
    "circle": {0: 1, 1: 1},
    "interval": {0: 0, 1: 1},
    "torus": {0: 2, 1: 4, 2: 2},
    "focus_focus": {2: 1},
}


def smoke_test(fixtures_dir: Path = FIXTURES_DIR) -> dict:
    """
    Run every bundled fixture end to end.

    Returns:
        Dictionary with test results
    """
    from mpmath import mpc

    from tropical.errors import TropicalError
    from tropical.manifest import load_manifest
    from tropical.period_engine import compute_period
    from tropical.sheaf_homology import pushforward_homology
    from tropical.tropical_cycles import validate_cycle

    print(f"Running tropical smoke test on: {fixtures_dir}")
    print()

    results = {
        "status": "unknown",
        "errors": [],
        "warnings": [],
        "manifests": 0,
        "periods_checked": 0,
        "homology_checked": 0,
    }

    paths = sorted(p for p in fixtures_dir.glob("*.json") if p.name != "run_config.json")
    if not paths:
        results["status"] = "failed"
        results["errors"].append(f"no fixtures in {fixtures_dir}")
        return results

    for i, path in enumerate(paths, 1):
        print(f"{i}. {path.stem}")
        try:
            manifest = load_manifest(path)
            results["manifests"] += 1

            report = manifest.affine.validate()
            if not report.is_valid:
                results["errors"].extend(f"{path.stem}: {e['subject']}: {e['message']}" for e in report.errors)
                print(f"   ❌ affine data invalid ({len(report.errors)} errors)")
                continue

            level, pl = pushforward_homology(manifest.affine)
            print(f"   homology ({level}): {pl.homology.summary()}")
            if not pl.holds:
                results["errors"].append(f"{path.stem}: Poincaré–Lefschetz check failed: {pl.problems}")
            for degree, expected in EXPECTED_RANKS.get(manifest.name, {}).items():
                results["homology_checked"] += 1
                if pl.homology.rank(degree) != expected:
                    results["errors"].append(f"{path.stem}: rank H_{degree} = {pl.homology.rank(degree)}, "
                                             f"expected {expected}")

            for name, cycle in sorted(manifest.all_cycles().items()):
                cycle_report = validate_cycle(manifest.affine, cycle)
                if not cycle_report.is_valid:
                    results["errors"].append(f"{path.stem}/{name}: {cycle_report.errors[0]['message']}")
                    continue
                expected = EXPECTED_PERIODS.get((manifest.name, name))
                if expected is None:
                    continue
                period = compute_period(manifest.affine, cycle, manifest.gluing, manifest.slabs)
                results["periods_checked"] += 1
                print(f"   {period.format(name=f'h_{name}')}")
                constant, exponent = expected
                if period.t_exponent != exponent or abs(period.sign * period.constant - mpc(constant)) > 1e-12:
                    results["errors"].append(f"{path.stem}/{name}: {period.format()}, "
                                             f"expected constant {constant} and t^{exponent}")

            missing = [c for (m, c) in EXPECTED_PERIODS if m == manifest.name and c not in manifest.all_cycles()]
            for name in missing:
                results["warnings"].append(f"{path.stem}: cycle '{name}' not found")

        except TropicalError as e:
            results["errors"].append(e.prefixed())
            print(f"   ERROR: {e.prefixed()}")

    results["status"] = "passed" if not results["errors"] else "failed"

    # Print summary
    print("\n" + "=" * 50)
    print("SMOKE TEST RESULTS")
    print("=" * 50)
    print(f"Status: {results['status'].upper()}")
    print(f"Manifests loaded: {results['manifests']}/{len(paths)}")
    print(f"Periods checked: {results['periods_checked']}")
    print(f"Homology ranks checked: {results['homology_checked']}")

    if results['warnings']:
        print("\nWarnings:")
        for w in results['warnings']:
            print(f"  - {w}")

    if results['errors']:
        print("\nErrors:")
        for err in results['errors']:
            print(f"  - {err}")

    print("=" * 50)

    return results


def main():
    parser = argparse.ArgumentParser(
        description="Smoke test for the tropical period engine",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument(
        "--fixtures-dir",
        type=str,
        default=str(FIXTURES_DIR),
        help="Directory holding the bundled manifests",
    )
    parser.add_argument(
        "--verbose",
        action="store_true",
        help="Debug logging",
    )

    args = parser.parse_args()
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    results = smoke_test(Path(args.fixtures_dir))

    # Exit with appropriate code
    sys.exit(0 if results["status"] == "passed" else 1)


if __name__ == "__main__":
    main()
