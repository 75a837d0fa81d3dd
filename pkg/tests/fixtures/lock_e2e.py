"""Record the end-to-end reference run into e2e_locked.json.

Run once and commit the result; the acceptance suite compares against it.

    python3 tests/fixtures/lock_e2e.py
"""

import json
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

from e2e_case import run_case  # noqa: E402


def main():
    ref = run_case()
    ref["thresholds"] = {
        "min_mpsnr_vs_noisy": ref["noisy_mpsnr"] + 12.0,
        "min_mpsnr_vs_baseline": ref["baseline_mpsnr"] - 0.1,
    }
    (HERE / "e2e_locked.json").write_text(json.dumps(ref, indent=1, sort_keys=True) + "\n")
    print(json.dumps({k: v for k, v in ref.items() if k != "config"}, indent=1))


if __name__ == "__main__":
    main()
