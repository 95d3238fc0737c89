import sys

from lambdaq.cli import main

sys.exit(main())
