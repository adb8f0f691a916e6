"""Run the table2 preset; extra arguments go to `satgame reproduce table2`.

    python3 scripts/reproduce_table2.py --seed 0 --fast --out results/table2
"""

import sys

from satgame.cli import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", "table2", *sys.argv[1:]]))
