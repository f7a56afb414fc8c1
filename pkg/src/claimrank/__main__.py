import sys

from claimrank.cli import main

sys.exit(main())
