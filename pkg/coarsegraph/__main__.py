import sys

from coarsegraph.cli import main

sys.exit(main())
