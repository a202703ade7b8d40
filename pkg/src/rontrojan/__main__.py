import sys

from rontrojan.cli import main

sys.exit(main())
