import sys

from ragocl.harness.cli import main

sys.exit(main())
