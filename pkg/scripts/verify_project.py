# scripts/verify_project.py
import argparse
import time

from dotenv import load_dotenv

from loopgauge.config import configure_logging, get_settings
from loopgauge.services.paperlab.catalog import verify_catalog


def main():
    load_dotenv()
    ap = argparse.ArgumentParser(description="Run the claim catalog and write a markdown report.")
    ap.add_argument("--seed", type=int, default=get_settings().seed)
    ap.add_argument("--samples", type=int, default=None)
    ap.add_argument("--threads", type=int, default=get_settings().threads)
    ap.add_argument("--out", default="report.md")
    args = ap.parse_args()
    configure_logging(get_settings().log_level)

    print("Starting verification...")
    start = time.time()
    results = verify_catalog(seed=args.seed, samples=args.samples, threads=args.threads)
    elapsed = time.time() - start

    # Generate Report
    report = f"# Verification Report\n\nSeed {args.seed}, {len(results)} claims, {elapsed:.1f}s.\n\n"
    report += "| Claim | Result | Computed | Expected | Tolerance | Provenance | Time |\n|---|---|---|---|---|---|---|\n"
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        report += f"| {r.claim_id} | {status} | {r.computed:.3e} | {r.expected:.3e} | {r.tolerance:.0e} | {r.provenance} | {r.runtime_ms / 1000:.2f}s |\n"

    failed = [r for r in results if not r.passed]
    if failed:
        report += "\n## Failures\n\n"
        for r in failed:
            report += f"- **{r.claim_id}**: {r.statement}. Detail: `{r.detail}`\n"

    with open(args.out, "w") as f:
        f.write(report)

    print(f"Report generated: {args.out}")
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
