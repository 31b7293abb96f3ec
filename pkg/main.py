# main.py
import sys

from HypLab.cli import main

if __name__ == "__main__":
    sys.exit(main())
