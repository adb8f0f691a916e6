"""Run the table1 preset; extra arguments go to `satgame reproduce table1`.

    python3 scripts/reproduce_table1.py --seed 0 --fast --out results/table1
"""

import sys

from satgame.cli import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", "table1", *sys.argv[1:]]))
