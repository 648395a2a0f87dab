import sys

from maintvar.cli import main

sys.exit(main())
