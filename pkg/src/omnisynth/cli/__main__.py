import sys

from omnisynth.cli import main

sys.exit(main())
