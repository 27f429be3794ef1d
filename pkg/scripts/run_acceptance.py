"""Run the acceptance criteria and print one pass/fail line each.

    python scripts/run_acceptance.py            # all criteria
    python scripts/run_acceptance.py 1 4 10     # selected criteria by number
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

import test_acceptance as acc  # noqa: E402


def main(argv):
    wanted = set(argv)
    failed = 0
    for name in acc.CRITERIA:
        if wanted and name.split()[0] not in wanted:
            continue
        failed += not acc.evaluate(name).ok
        print(acc.format_line(name), flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
