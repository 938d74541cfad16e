import sys

from classical_limit.cli import main

sys.exit(main())
