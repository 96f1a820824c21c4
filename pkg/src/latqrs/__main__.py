import sys

from latqrs.cli import main

sys.exit(main())
