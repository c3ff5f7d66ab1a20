import sys

from flipflop.cli import main

sys.exit(main())
