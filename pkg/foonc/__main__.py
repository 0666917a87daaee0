import sys

from foonc.cli import main

sys.exit(main())
