import sys

from .Commands import main

if __name__ == "__main__":
    sys.exit(main())
