import sys

from boxcrit.cli import main

sys.exit(main())
