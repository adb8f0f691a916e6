"""Run the four RAT threshold presets; extra arguments go to `satgame reproduce rat`.

    python3 scripts/reproduce_rat.py --seed 0 --fast --out results/rat
"""

import sys

from satgame.cli import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", "rat", *sys.argv[1:]]))
