"""Allow ``python -m qspeckle``."""

import sys

from qspeckle.cli import main

sys.exit(main())
