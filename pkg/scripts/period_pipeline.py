#!/usr/bin/env python3
"""
Tropical Period Pipeline

Batch front end for the period engine: loads manifests, validates them,
computes homology of i_*Λ, periods of tropical 1-cycles and runs the
numeric verification suite.

Output is a human summary followed by a key=value block (one line per
result, floats at fixed precision). The exit code is 0 iff every check
passes.

Usage:
    # Everything on every bundled fixture:
    python period_pipeline.py all

    # Period of one fixture (name under templates/tropical or a path):
    python period_pipeline.py period tate_k2

    # Numeric oracle with more samples, report to a file:
    python period_pipeline.py verify --samples 512 --report reports/verify.txt
"""

import argparse
import copy
import logging
import random
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from tropical.analytic_oracle import run_verification
from tropical.config import RunConfig, deep_merge, load_config
from tropical.errors import TropicalError
from tropical.manifest import Manifest, load_manifest
from tropical.period_engine import assemble_integral, check_normalized, compute_period, format_complex
from tropical.polyhedral_complex import validate as validate_complex
from tropical.sheaf_homology import barycentric_comparison, check_graded_concentration, level_complex, \
    pushforward_homology
from tropical.tropical_cycles import CycleHomology, validate_cycle

logger = logging.getLogger(__name__)

COMMANDS = ["validate", "homology", "period", "verify", "generate", "all"]


class PeriodPipeline:
    """Runs engine commands over manifests and collects a report"""

    def __init__(self, workspace_root: Path, overrides: Optional[Dict] = None):
        self.workspace_root = workspace_root
        self.fixtures_dir = workspace_root / "templates" / "tropical"
        self.overrides = overrides or {}
        self.config: RunConfig = load_config(overrides=self.overrides)
        self.records: List[Tuple[str, str]] = []
        self.failures: List[str] = []

    # -- bookkeeping -------------------------------------------------------

    def record(self, key: str, value):
        self.records.append((key, str(value)))

    def check(self, key: str, passed: bool, detail: str = "") -> bool:
        self.record(key, "pass" if passed else "fail")
        if not passed:
            self.failures.append(f"{key}{': ' + detail if detail else ''}")
        return passed

    def fmt(self, x) -> str:
        return format_complex(x, self.config.report_precision)

    def bundled_manifests(self) -> List[Path]:
        return sorted(p for p in self.fixtures_dir.glob("*.json") if p.name != "run_config.json")

    def resolve(self, name: str) -> Path:
        path = Path(name)
        if path.exists():
            return path
        candidate = self.fixtures_dir / (name if name.endswith(".json") else f"{name}.json")
        return candidate if candidate.exists() else path

    def load(self, name: str) -> Manifest:
        manifest = load_manifest(self.resolve(name))
        # file defaults < manifest options < command-line flags
        merged = deep_merge(copy.deepcopy(manifest.options), self.overrides)
        self.config = load_config(overrides=merged)
        self.config.apply_precision()
        return manifest

    # -- commands ----------------------------------------------------------

    def validate(self, m: Manifest) -> bool:
        print(f"\n[validate] {m.name}")
        ok = True

        complex_report = validate_complex(m.complex)
        ok &= self.check(f"{m.name}.complex", complex_report.is_valid, "; ".join(complex_report.kinds()))

        affine_report = m.affine.validate()
        if not affine_report.is_valid:
            affine_report.print_report(f"Affine structure of {m.name}")
        ok &= self.check(f"{m.name}.affine", affine_report.is_valid, "; ".join(affine_report.kinds()))

        for name, cycle in sorted(m.all_cycles().items()):
            report = validate_cycle(m.affine, cycle)
            for w in report.warnings:
                print(f"  ⚠️  {name}: {w['message']}")
            ok &= self.check(f"{m.name}.cycle.{name}", report.is_valid,
                             report.errors[0]["message"] if report.errors else "")

        for piece, slab in sorted(m.slabs.items()):
            k = min(self.config.order, slab.order)
            ok &= self.check(f"{m.name}.slab.{piece}.normalized", check_normalized(slab, k),
                             f"log f has pure t-terms up to order {k}")

        print(f"  {'✅' if ok else '❌'} {len(m.complex.cells)} cells, {len(m.all_cycles())} cycles")
        return ok

    def homology(self, m: Manifest) -> bool:
        print(f"\n[homology] {m.name}")
        level, report = pushforward_homology(m.affine)
        h, c = report.homology, report.cohomology
        print(f"  level: {level}")
        print(f"  H_i(B,∂B;i_*Λ): {h.summary()}")
        print(f"  H^i(B;i_*Λ):    {c.summary()}")
        self.record(f"{m.name}.homology.level", level)
        for i in range(m.n + 1):
            self.record(f"{m.name}.homology.H_{i}.rank", h.rank(i))
            self.record(f"{m.name}.homology.H_{i}.torsion", ",".join(map(str, h.torsion(i))) or "-")
            self.record(f"{m.name}.cohomology.H^{i}.rank", c.rank(i))

        ok = self.check(f"{m.name}.homology.chain_map", report.chain_map_holds)
        ok &= self.check(f"{m.name}.homology.poincare_lefschetz", report.holds, "; ".join(report.problems))
        ok &= self.check(f"{m.name}.homology.euler", h.euler_consistent())

        _, _, same = barycentric_comparison(affine=m.affine)
        ok &= self.check(f"{m.name}.homology.barycentric", same)

        concentration = check_graded_concentration(level_complex(m.affine, level))
        bad = [tau for tau, good in concentration.items() if not good]
        ok &= self.check(f"{m.name}.homology.graded_concentration", not bad, ", ".join(bad))

        for p in report.problems:
            print(f"  ❌ {p}")
        print(f"  {'✅' if ok else '❌'} comparison {'holds' if report.holds else 'fails'}")
        return ok

    def period(self, m: Manifest) -> bool:
        print(f"\n[period] {m.name}")
        ok = True
        rng = random.Random(self.config.seed)
        for name, cycle in sorted(m.all_cycles().items()):
            if any(m.complex.dim(v.cell) < m.n and m.complex.is_boundary(v.cell) for v in cycle.vertices.values()):
                print(f"  ℹ️  {name}: relative cycle (meets ∂B), no finite period")
                self.record(f"{m.name}.period.{name}", "relative")
                continue

            product = compute_period(m.affine, cycle, m.gluing, m.slabs)
            print(f"  {product.format(self.config.report_precision, name=f'h_{name}')}")
            if product.crossings:
                print(f"    {'edge':<8} {'piece':<16} {'κ':>3} {'⟨d,ξ⟩':>6}  s_p")
            for term in product.crossings:
                print(f"    {term.edge:<8} {term.piece:<16} {term.kappa:>3} {term.pairing:>6}  {self.fmt(term.s_p)}")

            key = f"{m.name}.period.{name}"
            self.record(f"{key}.sign", product.sign)
            self.record(f"{key}.constant", self.fmt(product.constant))
            self.record(f"{key}.t_exponent", product.t_exponent)
            self.record(f"{key}.crossings", len(product.crossings))

            first = assemble_integral(m.affine, cycle, m.gluing, m.slabs, rng=rng)
            ok &= self.check(f"{key}.assembly", first.agrees,
                             f"{first.product.format()} vs {product.format()}")
            stable = all(assemble_integral(m.affine, cycle, m.gluing, m.slabs, rng=rng).value == first.value
                         for _ in range(self.config.radius_trials))
            ok &= self.check(f"{key}.radius_invariance", stable)

            ok &= self.check(f"{key}.reversal",
                             compute_period(m.affine, cycle.reversed(m.affine), m.gluing, m.slabs)
                             .equals(product.inverse(), self.config.tolerance))
            ok &= self.check(f"{key}.doubling",
                             compute_period(m.affine, cycle.scaled(2), m.gluing, m.slabs)
                             .equals(product * product, self.config.tolerance))
            ok &= self.check(f"{key}.disjoint_union",
                             compute_period(m.affine, cycle.disjoint_union(cycle), m.gluing, m.slabs)
                             .equals(product * product, self.config.tolerance))
        return ok

    def generate(self, m: Manifest) -> bool:
        print(f"\n[generate] {m.name}")
        generated = m.generated_cycles()
        for name, cycle in generated.items():
            edges = ", ".join(f"{e.source}→{e.target} ξ={e.xi}" for e in cycle.edges)
            print(f"  {name}: {edges}")
            self.record(f"{m.name}.generate.{name}.edges", len(cycle.edges))

        context = CycleHomology(m.affine)
        cycles = [c for _, c in sorted(m.all_cycles().items())]
        achieved, target, spans = context.generation_check(cycles)
        self.record(f"{m.name}.generate.achieved_rank", achieved)
        self.record(f"{m.name}.generate.target_rank", target)
        print(f"  {'✅' if spans else '❌'} cycles span rank {achieved} of {target}")
        return self.check(f"{m.name}.generate.spans", spans, f"rank {achieved} of {target}")

    def verify(self) -> bool:
        print("\n[verify] analytic oracle")
        rows = run_verification(self.config.quadrature, self.config.seed)
        p = self.config.report_precision
        print(f"  {'quantity':<40} {'closed form':>24} {'numeric':>24} {'error':>10}")
        ok = True
        for row in rows:
            marker = "✅" if row.passed else "❌"
            print(f"  {row.quantity:<40} {self.fmt(row.closed_form):>24} {self.fmt(row.numeric):>24} "
                  f"{row.error:>10.2e} {marker}")
            self.record(f"verify.{row.quantity}.error", f"{row.error:.{p}e}")
            ok &= self.check(f"verify.{row.quantity}", row.passed, f"error {row.error:.3e}")
        return ok

    # -- driver ------------------------------------------------------------

    def run(self, command: str, names: List[str]) -> bool:
        if command == "verify":
            return self._guarded("verify", self.verify)

        steps = ["validate", "homology", "period", "generate"] if command == "all" else [command]
        names = names or [p.stem for p in self.bundled_manifests()]
        ok = True
        for name in names:
            try:
                m = self.load(name)
            except TropicalError as e:
                print(f"\n❌ {e.prefixed()}")
                self.check(f"{Path(name).stem}.load", False, e.prefixed())
                ok = False
                continue
            for step in steps:
                ok &= self._guarded(f"{m.name}.{step}", lambda: getattr(self, step)(m))
        if command == "all":
            ok &= self._guarded("verify", self.verify)
        return ok

    def _guarded(self, key: str, fn) -> bool:
        try:
            return fn()
        except TropicalError as e:
            print(f"  ❌ {e.prefixed()}")
            self.record(f"{key}.error", e.prefixed())
            self.failures.append(e.prefixed())
            return False

    def report_block(self) -> str:
        return "\n".join(f"{k}={v}" for k, v in self.records)

    def print_summary(self, command: str):
        print(f"\n{'=' * 80}")
        print(f"SUMMARY: {command}")
        print("=" * 80)
        passed = sum(1 for _, v in self.records if v == "pass")
        print(f"Checks passed: {passed}/{passed + sum(1 for _, v in self.records if v == 'fail')}")
        if self.failures:
            print(f"\n❌ FAILURES ({len(self.failures)}):")
            for f in self.failures:
                print(f"  - {f}")
        else:
            print("\n✅ All checks passed!")
        print(f"\n--- report ---\n{self.report_block()}")


def main():
    parser = argparse.ArgumentParser(
        description="Tropical Period Pipeline - homology, periods and numeric verification",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Run every command on every bundled fixture:
  python period_pipeline.py all

  # Homology of the torus fixture:
  python period_pipeline.py homology torus

  # Periods with a fixed seed for the radius trials:
  python period_pipeline.py period tate_k3 circle --seed 7
        """
    )

    parser.add_argument("command", choices=COMMANDS, help="What to run")
    parser.add_argument("manifests", nargs="*",
                        help="Fixture names under templates/tropical or manifest paths (default: all fixtures)")
    parser.add_argument("--order", type=int, help="Truncation order k for slab functions")
    parser.add_argument("--tolerance", type=float, help="Float tolerance for period comparisons")
    parser.add_argument("--samples", type=int, help="Quadrature samples per angular dimension (dimensions 1 and 2)")
    parser.add_argument("--seed", type=int, help="Seed for randomized checks")
    parser.add_argument("--report", type=str, help="Write the key=value report to this path")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")

    args = parser.parse_args()
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    overrides: Dict = {}
    for key in ("order", "tolerance", "seed"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    if args.samples is not None:
        # the 3-torus grid grows cubically; it keeps its configured count
        overrides["quadrature"] = {"samples": {"1": args.samples, "2": args.samples}}

    # Get workspace root (parent of scripts directory)
    workspace_root = Path(__file__).parent.parent

    try:
        pipeline = PeriodPipeline(workspace_root, overrides)
    except TropicalError as e:
        print(e.prefixed())
        sys.exit(1)

    ok = pipeline.run(args.command, args.manifests)
    pipeline.print_summary(args.command)

    if args.report:
        report_path = Path(args.report)
        report_path.parent.mkdir(parents=True, exist_ok=True)
        report_path.write_text(pipeline.report_block() + "\n", encoding="utf-8")
        print(f"\nReport written to {report_path}")

    # Exit with appropriate code
    sys.exit(0 if ok and not pipeline.failures else 1)


if __name__ == "__main__":
    main()
